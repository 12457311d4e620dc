"""Backend selection for the hot kinematics/dynamics kernels.

The compiled Cython core is used when importable; set GIC_BACKEND=python to
force the pure-numpy fallback, or GIC_BACKEND=compiled to require the
extension (raising if it is missing). Both expose the same kernel functions
and agree numerically to tight tolerance.
"""
import os

from . import purecore

_requested = os.environ.get("GIC_BACKEND", "").strip().lower()

if _requested in ("", "auto", "compiled"):
    try:
        from . import fastcore as active
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "GIC_BACKEND=compiled but the fastcore extension is not built; "
                "reinstall with a C toolchain or unset GIC_BACKEND"
            )
        active = purecore
elif _requested == "python":
    active = purecore
else:
    raise ValueError(f"unknown GIC_BACKEND value {_requested!r}")

BACKEND_NAME = active.BACKEND_NAME


def get_backend(name=None):
    """Return a kernel module by name: 'compiled', 'python', or None for the active one."""
    if name is None:
        return active
    if name == "python":
        return purecore
    if name == "compiled":
        from . import fastcore
        return fastcore
    raise ValueError(f"unknown backend {name!r}")
