"""Flux, action and periodic orbits for area-preserving maps of the 2-torus."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    IDENTITY, BumpProfile, Disk, DiskTwist, HorizontalShear, Point2, TorusMap, Translation,
    VerticalShear, compose, inverse, iterate, jacobian, lift_eval, project, random_chain,
    torus_distance,
)
from .errors import (  # noqa: E402
    DisjointnessFailed, DiskTooLarge, MapFileError, NoOrbitFound, NotDiskSupported,
    PathOutsideDisk, TargetUnreachable, TorusClosingError,
)
from .invariants import (  # noqa: E402
    FluxVector, Loop, action_profile, check_action_additivity, flux_vector, is_exact,
    loop_area, loop_flux,
)
from .kernels import BACKEND  # noqa: E402
from .mapfile import load_map, parse_map, serialize_map  # noqa: E402
from .orbits import OrbitRecord, ScanReport, closing_scan, find_periodic_points  # noqa: E402
from .perturb import rationalize_flux, twist_family  # noqa: E402
from .quadrature import GridSpec, Path, integrate_disk, integrate_torus, line_integral_pullback  # noqa: E402
