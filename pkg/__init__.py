"""
H1 UDF Engine - Main Package
Exact symbolic computation of the universal deformation formula for the
Connes-Moscovici Hopf algebra H1, with verification suites for the
underlying Fedosov construction and its combinatorial identities.
"""

__version__ = "1.0.0"
__author__ = "H1 UDF Engine"
__description__ = "Exact universal deformation formula for H1 and its verification"

# Package metadata
PACKAGE_NAME = "h1-udf-engine"

# Default configuration (each key can be overridden by a UDF_* variable)
DEFAULT_CONFIG = {
    "max_order": 4,
    "default_order": 2,
    "degree": 6,
    "cache": ".udf_cache",
    "moyal_sign": 1,
    "output_format": "text"
}

# Verification suites
SUITES = ["hopf", "jet", "fedosov", "udf", "twist", "appendix", "all"]

# Tables for `dump`
SECTION_KINDS = ["hat_f", "alpha_hat_g", "u_alpha_inv", "u_alpha_beta", "v_alphabeta", "u_alpha"]

# Output formats
OUTPUT_FORMATS = ["text", "json", "latex", "markdown", "html"]
