"""Number-phase Wigner kernels on a truncated extended number ladder.

The package builds the kernels from their defining spectra, evaluates
distributions and operator representations, and audits the six structural
conditions (Hermiticity, marginals, displacement covariance, overlap,
reflection, time reversal), including the demonstration that the
conditions admit distinct kernels.
"""

from .periodics import (TWO_PI, K_constant, PeriodicSignal, SquareWave4pi,
                        UnitFunction, dirichlet_delta, dirichlet_delta_deriv,
                        quadrature_du, r_theta, sawtooth, square_wave,
                        unit_eval)
from .fock import (BasisWindow, FockOperator, FockState, WindowError,
                   gaussian_packet, number_operator, number_state,
                   parse_state_spec, phase_packet, phase_state,
                   projector_physical, theta_operator)
from .kernel import (GSpectrum, WignerKernel, base_from_spectrum,
                     c_coefficient, closed_form_S1, closed_form_S2, element,
                     g_eval, h_route_element, kernel_from_text,
                     kernel_to_text, make_kernel, support_antidiagonals,
                     w3_kernel)
from .wigner import (AliasingError, DensityError, OperatorRep, WignerGrid,
                     expectation, invert_representation, number_marginal,
                     op_representation, overlap_pairing, phase_density,
                     phase_marginal, symmetric_product_rep, trace_pairing,
                     wigner_of_state)
from .verify import (ConditionReport, check_hermiticity, check_marginals,
                     check_overlap, check_reflection, check_shift_covariance,
                     check_time_reversal, full_report, nonuniqueness_witness)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
