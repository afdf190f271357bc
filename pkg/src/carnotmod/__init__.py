import logging
import logging.config

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraKind,
    HTypeAlgebra,
    build_algebra,
    complex_heisenberg,
    euclidean,
    generic_step2,
    quaternion_heisenberg,
    real_heisenberg,
)
from .config import settings  # noqa: E402
from .crofton import (  # noqa: E402
    CroftonReport,
    Integrand,
    RadialProfile,
    corollary_experiment,
    euclidean_crofton,
    holder_bound,
    htype_crofton_horizontal,
    htype_crofton_vertical,
)
from .errors import (  # noqa: E402
    CarnotError,
    DomainError,
    SolverError,
    StructuralError,
    UnsupportedError,
    UnsupportedExponentError,
    ValidationError,
)
from .grassmann import (  # noqa: E402
    Isometry,
    Subalgebra,
    admissible_shapes,
    reference_subalgebra,
    sample_grassmannian,
    sample_isometry,
    sphere_pushforward,
)
from .group import GroupPoint, HomogeneousNorm, dilate, distance, inverse, multiply, norm  # noqa: E402
from .report import RunManifest  # noqa: E402

__all__ = [
    "__version__",
    "settings",
    # Algebras and groups
    "AlgebraKind",
    "HTypeAlgebra",
    "build_algebra",
    "real_heisenberg",
    "complex_heisenberg",
    "quaternion_heisenberg",
    "euclidean",
    "generic_step2",
    "GroupPoint",
    "HomogeneousNorm",
    "multiply",
    "inverse",
    "dilate",
    "norm",
    "distance",
    # Grassmannians
    "Isometry",
    "Subalgebra",
    "admissible_shapes",
    "reference_subalgebra",
    "sample_isometry",
    "sample_grassmannian",
    "sphere_pushforward",
    # Crofton
    "RadialProfile",
    "Integrand",
    "CroftonReport",
    "euclidean_crofton",
    "htype_crofton_horizontal",
    "htype_crofton_vertical",
    "holder_bound",
    "corollary_experiment",
    # Reports
    "RunManifest",
    # Errors
    "CarnotError",
    "StructuralError",
    "DomainError",
    "UnsupportedError",
    "UnsupportedExponentError",
    "SolverError",
    "ValidationError",
]

# DynaBox is a dict subclass; dictConfig takes it as is
logging.config.dictConfig(settings.LOGGING)
