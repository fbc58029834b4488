"""Largest and smallest integral positions of log-concave functions.

John problem: maximize the s-integral of a position h of g subject to h <= f.
Loewner problem: minimize it subject to f <= h.  Solutions come with
contact-pair certificates of optimality or with ascent directions.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .funcmodel import (ConvexBody, Ellipsoid, ExponentialNorm, Gaussian, IndicatorOfBody, InnerBody,
                        LogConcaveFn, PiecewisePsi, Polytope, Power, Profile, QConcavePower,
                        RadialProfile, Restricted, Transformed, check_assumptions, s_integral)
from .polar import log_conjugate, polar_of_affine_image, power_polar
from .contact import ContactPair, ExtendedOperator, GroupElement, normal_pairs_at
from .positions import (JOHN, LOWNER, Direction, Position, SearchConfig, apply, john_margin,
                        lowner_margin, perturb, s_integral_of)
from .solver import SolveOptions, SolveResult, solve_john, solve_lowner
from .certificate import (Certificate, SeparatingDirection, ascent_step, certify, extract_pairs,
                          glmp_reduce, power_transform_certificate, verify_john, verify_lowner)
