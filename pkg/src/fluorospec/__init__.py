"""Open-system model of a laser-driven single fluorophore coupled to
configurational environment macrostates: block Lindblad rate generators,
steady states, field correlations, optical spectra, and photon-counting
statistics."""

__version__ = "0.1.0"

from .correl import (ObservableSeries, SeriesKind, ZeroIntensity, c1, c2, g2,
                     qrt_two_time, stationary_intensity)
from .counting import (CountingRecord, CountingSplit, ZeroCounts,
                       counting_record, counting_split, line_shape,
                       line_shape_sweep, mandel_q, mean_counts,
                       optical_bloch_rhs, pn, second_factorial,
                       stationary_mandel)
from .model import (BlockState, ConfigSpace, FluctuationRates,
                    GeneralJumpChannel, ModelSpec, OperatorKind,
                    PerStateParams, SuperOp, apply_generator, build_generator,
                    effective_decay, validate)
from .scenarios import (BlinkingApprox, blinking_rates,
                        classical_blinking_populations, diffusion_chain,
                        lifetime_fluct, light_assisted, mandel_detuning_limit,
                        mapped_self_fluct, scaled_triplet, single_state,
                        spectral_two_state)
from .spectrum import coherent_weight, incoherent_spectrum, sum_rule_check
from .steady import (NullSpaceDegenerate, SingularShift, SteadyDecomposition,
                     config_populations, evolve, laurent_decomposition,
                     resolve, steady_state)

__all__ = [name for name in dir() if not name.startswith("_")]
