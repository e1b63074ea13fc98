"""Numerics for twist maps of the annulus and their invariant foliations by graphs."""
from .exceptions import *  # noqa: F401,F403
from .maps import (AnnulusPoint, Jacobian2, LiftPoint, TwistMapSpec, exactness_flux,
                   iterated_twist_margin, map_eval_lift, map_jacobian, table_map, twist_margin)
from .foliation import (FoliationSpec, GeneratingGrid, HolderFit, LipschitzFit, area_between,
                        bilipschitz_fit, build_generating_function, c1_report, holder_fit,
                        leaf_mean, mixed_partials_check, standard_foliation, table_foliation)
from .gallery import (appendix_a_family, appendix_a_params, integrable_family, integrable_map,
                      shear_conjugator, strange_foliation, strange_params, strange_twist_map)
from .rotation import (CircleMapLift, ConjugacyData, RhoProfile, RotationNumber, measure_cdf,
                       projected_circle_map, rational_leaf_density, rho_profile,
                       rotation_number, semiconjugacy_residual)
from .green import GreenData, green_limits, green_slope, sandwich_check
from .straighten import (MollifiedFamily, StraighteningMap, area_distortion,
                         arnold_liouville_residual, build_straightening, mollify,
                         monotone_convolution_check)

__version__ = "0.1.0"
