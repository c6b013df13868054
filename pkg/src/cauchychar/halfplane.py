"""Complex arithmetic on the upper half-plane and the unit disk.

Complex numbers are plain Python ``complex`` values (or numpy complex arrays).
Parameters are validated on entry with :func:`halfplane_param` and
:func:`disk_param` rather than wrapped in dedicated classes.

Logarithm branch: ``arg`` lies in ``(-pi, pi]`` and every negative real,
including one carrying a signed zero imaginary part, receives ``+pi``.
Consequently ``(-8) ** (1/3) == 2 * exp(i pi / 3)``.

Powers of zero follow the convention ``0 ** a == 0`` for *every* ``a``,
``a == 0`` included, so ``E[X ** 0]`` is ``P(X != 0)`` rather than 1.
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import DomainError

__all__ = [
    "halfplane_param",
    "disk_param",
    "principal_log",
    "cpow",
    "mobius_to_disk",
    "mobius_to_halfplane",
    "parse_complex",
    "format_complex",
    "close",
]

DEFAULT_TOL = 1e-12


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


def halfplane_param(z) -> complex:
    """Validate a Cauchy parameter ``location + 1j * scale`` with ``scale > 0``."""
    z = complex(z)
    if not _finite(z):
        raise DomainError(f"half-plane parameter must be finite, got {z!r}")
    if not z.imag > 0:
        raise DomainError(f"half-plane parameter needs Im > 0, got {format_complex(z)}")
    return z


def disk_param(w) -> complex:
    """Validate a circular-Cauchy parameter, ``|w| < 1``."""
    w = complex(w)
    if not _finite(w):
        raise DomainError(f"disk parameter must be finite, got {w!r}")
    if not abs(w) < 1:
        raise DomainError(f"disk parameter needs |w| < 1, got {format_complex(w)}")
    return w


def _scalar_out(result, like):
    if np.ndim(like) == 0 and np.ndim(result) == 0:
        return complex(result)
    return result


def principal_log(z):
    """Principal logarithm with ``log(x) = log|x| + i*pi`` for ``x < 0``.

    Accepts scalars or arrays. Raises :class:`DomainError` on zero.
    """
    arr = np.asarray(z, dtype=complex)
    if np.any(arr == 0):
        raise DomainError("log of zero")
    theta = np.arctan2(arr.imag, arr.real)
    # arctan2(-0.0, x<0) is -pi; the negative axis always belongs to +pi
    theta = np.where((arr.imag == 0) & (arr.real < 0), np.pi, theta)
    out = np.log(np.abs(arr)) + 1j * theta
    return _scalar_out(out, z)


def cpow(z, a):
    """``z ** a := exp(a * principal_log(z))`` with ``0 ** a := 0``.

    ``z`` and ``a`` broadcast against each other.
    """
    zarr = np.asarray(z, dtype=complex)
    aarr = np.asarray(a, dtype=complex)
    zero = zarr == 0
    safe = np.where(zero, 1.0 + 0j, zarr)
    out = np.exp(aarr * principal_log(safe))
    out = np.where(zero, 0j, out)
    if np.ndim(z) == 0 and np.ndim(a) == 0:
        return complex(out)
    return out


def mobius_to_disk(gamma, z):
    """The map ``z -> (z - gamma) / (z - conj(gamma))`` from the closed half-plane onto the disk.

    Real ``z`` lands on the unit circle minus the point 1; ``z == gamma`` lands on 0.
    """
    gamma = halfplane_param(gamma)
    zarr = np.asarray(z, dtype=complex)
    if np.any(zarr.imag < 0):
        raise DomainError("mobius_to_disk is defined on Im(z) >= 0 only")
    out = (zarr - gamma) / (zarr - gamma.conjugate())
    return _scalar_out(out, z)


def mobius_to_halfplane(gamma, w):
    """Inverse map ``w -> (gamma - conj(gamma) * w) / (1 - w)`` from the closed disk."""
    gamma = halfplane_param(gamma)
    warr = np.asarray(w, dtype=complex)
    if np.any(warr == 1):
        raise DomainError("pole of inverse map at w = 1")
    if np.any(np.abs(warr) > 1 + 1e-12):
        raise DomainError("mobius_to_halfplane is defined on |w| <= 1 only")
    out = (gamma - gamma.conjugate() * warr) / (1 - warr)
    return _scalar_out(out, w)


def close(z1, z2, tol: float = DEFAULT_TOL) -> bool:
    """Componentwise comparison ``|dRe| <= tol and |dIm| <= tol``."""
    z1, z2 = complex(z1), complex(z2)
    return abs(z1.real - z2.real) <= tol and abs(z1.imag - z2.imag) <= tol


# ---------------------------------------------------------------------------
# literal grammar: ``a+bi``, ``a-bi``, ``bi``, ``a`` (whitespace ignored)

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PURE_IMAG = re.compile(rf"^(?P<im>[+-]?(?:{_NUM})?)i$")
_PURE_REAL = re.compile(rf"^[+-]?{_NUM}$")
_FULL = re.compile(rf"^(?P<re>[+-]?{_NUM})(?P<sign>[+-])(?P<im>{_NUM})?i$")


def _imag_part(text: str) -> float:
    if text in ("", "+"):
        return 1.0
    if text == "-":
        return -1.0
    return float(text)


def parse_complex(text: str) -> complex:
    """Parse a complex literal such as ``"0+1i"``, ``"-2.5-3e-1i"``, ``"2i"`` or ``"4"``."""
    s = "".join(str(text).split())
    if not s:
        raise DomainError("empty complex literal")
    m = _PURE_IMAG.match(s)
    if m:
        return complex(0.0, _imag_part(m["im"]))
    if _PURE_REAL.match(s):
        return complex(float(s), 0.0)
    m = _FULL.match(s)
    if m:
        im = _imag_part(m["sign"] + (m["im"] or ""))
        return complex(float(m["re"]), im)
    raise DomainError(f"malformed complex literal {text!r} (expected forms: a+bi, a-bi, bi, a)")


def format_complex(z) -> str:
    """Shortest lossless ``a+bi`` rendering; inverse of :func:`parse_complex`."""
    z = complex(z)
    re_s = repr(z.real)
    im = z.imag
    if math.copysign(1.0, im) < 0:
        return f"{re_s}-{repr(-im)}i"
    return f"{re_s}+{repr(im)}i"
