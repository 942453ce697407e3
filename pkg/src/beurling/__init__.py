"""Beurling prime systems at desk scale.

Construction, perturbation, random sampling, and analysis of Beurling
prime/integer systems: certified integer enumeration, Bohr-type gap
conditions, the Beurling zeta function and its inverse, and the Hardy
space experiments around the Helson counterexample.
"""

from .certreal import (
    CertComplex,
    CertReal,
    Ordering,
    as_certreal,
    certify_nonneg,
    cmp_certified,
    cprod,
    csum,
)
from .exceptions import (
    BeurlingError,
    CertificateFailure,
    DomainNotCertified,
    OrderingUndecided,
    PrecisionCapExceeded,
    WindowExhausted,
)
from .logint import li, li_deriv, li_float, li_inv

__version__ = "0.1.0"
