"""capflow: volume-preserving curvature flow of capillary graphs in curved balls."""

from .capfit import CapFit, IsoperimetricReport, cap_state, fit_cap, isoperimetric_check
from .config import RunConfig, parse_config
from .errors import (CapflowError, ConfigError, DomainError, FitFailure,
                     InvariantViolation, NumericalFailure)
from .flow import (FlowConfig, Trajectory, evolve, initial_state, speed_G,
                   speed_from_support, stable_dt, step)
from .grid import GraphState, Grid, bc_derivatives, boundary_closure, derivatives, kinematics
from .observables import (ObservableRecord, area, energy, mean_curvature,
                          minkowski_residual, observable_record, principal_curvatures,
                          sigma_k, volume, wetting_area)
from .spaceform import (CapProfile, SpaceForm, cap_profile, cap_profile_from_rhat,
                        conformal_factor, halfspace_to_ball, ball_to_halfspace,
                        killing_scalar_V, killing_vectors, model_to_radius,
                        radius_to_model, unit_cap_shape)

__version__ = "0.1.0"
