"""twinmatch: trajectory mutual information and twin-patch dictionaries.

Estimates MI between object-patch trajectories with k-NN entropy
estimators, filters patches by entropy with camera-motion correction,
and pairs each eligible patch with the scene-mate it shares the most
information with. Includes contrastive-loss math with analytic
gradients, a synthetic-scene harness with ground truth, and a CLI.
"""

from .alignment import (
    EligibilityReport,
    detect_camera_motion,
    eligible_patches,
    max_gap_split,
    patch_entropy,
)
from .errors import SceneFormatError, TwinMatchError, ZeroDistanceError
from .jsonio import dumps_canonical, format_float
from .knn_info import (
    VARIANTS,
    EstimatorConfig,
    as_sample_matrix,
    chebyshev_kth_distance,
    digamma,
    histogram_mi_oracle,
    kl_entropy,
    ksg_mi,
)
from .losses import LossConfig, combined_loss, neg_cosine, nt_xent
from .synth import (
    GroundTruth,
    SceneSpec,
    dumps_truth,
    gen_correlated_gaussian,
    gen_scene,
    load_truth,
    truth_to_dict,
)
from .trajectory import (
    GridLayout,
    Point3,
    SceneTrack,
    Trajectory,
    dumps_scene,
    fuse_depth,
    load_scene,
    load_scene_file,
    ring_membership,
)
from .twins import (
    POLICIES,
    MIMatrix,
    SceneTwins,
    TwinDictionary,
    TwinEntry,
    build_twin_dictionary,
    dumps_twin_dictionary,
    load_twin_dictionary,
    mi_matrix,
    select_twin,
    twin_dictionary_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "TwinMatchError",
    "SceneFormatError",
    "ZeroDistanceError",
    "EstimatorConfig",
    "VARIANTS",
    "digamma",
    "chebyshev_kth_distance",
    "kl_entropy",
    "ksg_mi",
    "histogram_mi_oracle",
    "as_sample_matrix",
    "Point3",
    "Trajectory",
    "GridLayout",
    "SceneTrack",
    "fuse_depth",
    "ring_membership",
    "load_scene",
    "load_scene_file",
    "dumps_scene",
    "EligibilityReport",
    "patch_entropy",
    "max_gap_split",
    "detect_camera_motion",
    "eligible_patches",
    "MIMatrix",
    "TwinEntry",
    "SceneTwins",
    "TwinDictionary",
    "POLICIES",
    "mi_matrix",
    "select_twin",
    "build_twin_dictionary",
    "twin_dictionary_to_dict",
    "dumps_twin_dictionary",
    "load_twin_dictionary",
    "LossConfig",
    "nt_xent",
    "neg_cosine",
    "combined_loss",
    "SceneSpec",
    "GroundTruth",
    "gen_correlated_gaussian",
    "gen_scene",
    "truth_to_dict",
    "dumps_truth",
    "load_truth",
    "dumps_canonical",
    "format_float",
]
