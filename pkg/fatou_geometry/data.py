"""
Fatou Geometry - Constants, Thresholds and Defaults

Every tolerance and default used by the experiment modules lives here, so that
reports can echo them and configs can override them by name.
"""

# =============================================================================
# RIEMANN SPHERE
# =============================================================================

SPHERE_DIAMETER = 2.0  # chordal metric: δ(a, b) ∈ [0, 2]
CHART_SWITCH_RADIUS = 1e8  # |z| above this is evaluated in the w = 1/z chart

# =============================================================================
# ROOT FINDING
# =============================================================================

ROOT_RESIDUAL_TOL = 1e-10  # |P(z)| ≤ tol · Σ|a_k||z|^k after polishing
ROOT_CLUSTER_RADIUS = 1e-7  # roots closer than this are merged
ABERTH_MAX_ITER = 400
ABERTH_TOL = 1e-14
ABERTH_RETRIES = 3  # initial-circle rotations before the companion fallback
NEWTON_POLISH_STEPS = 6
COPRIME_TOL = 1e-8  # no root of q within this distance of a root of p
COEFF_TRIM_TOL = 1e-14  # relative size below which a leading coefficient is zero

# =============================================================================
# ORBITS AND CYCLES
# =============================================================================

ORBIT_MAX = 100_000
OMEGA_BURN_IN = 1_000
OMEGA_SAMPLE = 10_000
OMEGA_MERGE_RADIUS = 1e-6
RHO_REC = 1e-3  # recurrence threshold for the semi-hyperbolic verdict
RHO_RECURRENT = 1e-6  # at or below: certainly recurrent at working precision
CYCLE_CHECK_TOL = 1e-8  # δ(f^k(p), p) bound for every reported cycle point
CYCLE_DETECT_TOL = 1e-10  # loop closure tolerance while following critical orbits
CYCLE_MAX_PERIOD = 64  # longest loop searched for along critical orbits
CRITICAL_FOLLOW_STEPS = 20_000
ATTRACTION_RADIUS = 1e-6  # "within 1e-6 of an attracting cycle"
SOLVE_MAX_PERIOD = 6  # f^k(z) = z solved directly for k ≤ this
SOLVE_SEEDS_PER_AXIS = 24
SOLVE_NEWTON_STEPS = 80

SUPERATTRACTING_MAX = 1e-8
NEUTRAL_BAND = 1e-3  # |m - 1| ≤ band → neutral
PARABOLIC_ANGLE_TOL = 1e-3  # radians
PARABOLIC_MAX_DENOMINATOR = 12

CYCLE_CLASSES = (
    "superattracting",
    "attracting",
    "repelling",
    "parabolic_suspect",
    "neutral_irrational_suspect",
)

# =============================================================================
# GRID
# =============================================================================

GRID_MIN_RESOLUTION = 16
GRID_MAX_ITER = 2000
GRID_CONVERGENCE_RADIUS = 1e-6
JULIA_BURN_IN = 20
JULIA_METHODS = ("inverse_iteration", "boundary_cells", "mixed")

# =============================================================================
# PULLBACKS
# =============================================================================

CRITICAL_VALUE_MARGIN = 1e-5  # m_cv
RADIUS_PERTURBATION = 1e-3  # r → r(1 ± 1e-3) on a bad radius
RADIUS_ATTEMPTS = 5
CIRCLE_POINTS = 256
REFINE_FRACTION = 1 / 8  # refine where lift spacing > component radius / 8
LIFT_MAX_BISECTIONS = 24
LIFT_NEWTON_STEPS = 12
LIFT_MAX_POINTS = 200_000
LIFT_ROUND_TRIP_TOL = 1e-7
FIT_RESIDUAL_MAX = 0.1
EXPSHRINK_LAMBDA_MIN = 1.05
SHRINK_FAIL_RATIO = 0.5
MAX_SKIP_FRACTION = 0.5
MOD_BOUND_CONSTANT = 64.0

# =============================================================================
# REGULARITY
# =============================================================================

QH_SUBDIVISION = 0.2  # segment chordal length ≤ 0.2 · min endpoint δ̂
JOHN_MIN_PATHS = 10
JOHN_NEAR_BOUNDARY_SHARE = 0.7  # share of samples drawn from the smallest-δ̂ decile
HOLDER_MIN_POINTS = 30
HOLDER_SLOPE_MAX = 5.0
HOLDER_RESIDUAL_IQR = 3.0
LC_JULIA_NEAR_CELLS = 1.5
LC_MIN_COMPONENT_CELLS = 4
LC_MIN_SEPARATION_CELLS = 4
LC_ENDPOINT_TOL = 1e-4
LC_DILATION_SLACK = 0.2
V_RADIUS_CANDIDATES = (0.5, 0.35, 0.25, 0.18, 0.12, 0.08, 0.05, 0.03, 0.02, 0.01)
V_CIRCLE_POINTS = 64
ENTRY_MAX_STEPS = 5000
DELTA_WEIGHT_FLOOR = 1e-9  # qh edge weights use max(min δ̂, floor)
JOHN_BUILDERS = ("dynamic_lift", "delta_ascent", "best_of_both")
JOHN_MAX_LEVELS = 64  # forward steps allowed before a sample enters V
JOHN_TAIL_CELLS = 4  # spacing of straight path pieces, in cells
COMPOSE_MAX_DEGREE = 64  # f^period is only formed up to this degree

# =============================================================================
# SUMMABILITY
# =============================================================================

MULTIPLICITY_CONVENTIONS = ("order", "local_degree")
CRITICAL_HIT_TOL = 1e-6
TREND_DECAY_RATIO = 0.9

# =============================================================================
# PRESET CATALOG
# Ascending coefficient vectors; the rabbit parameter is solved at load time.
# =============================================================================

PRESETS = {
    "squaring": {"num": [0, 0, 1], "den": [1], "formula": "z^2"},
    "chebyshev": {"num": [-2, 0, 1], "den": [1], "formula": "z^2 - 2"},
    "basilica": {"num": [-1, 0, 1], "den": [1], "formula": "z^2 - 1"},
    "dendrite": {"num": [1j, 0, 1], "den": [1], "formula": "z^2 + i"},
    "cauliflower": {"num": [0.25, 0, 1], "den": [1], "formula": "z^2 + 1/4"},
    "rabbit": {"num": None, "den": [1], "formula": "z^2 + c3, c3^3 + 2c3^2 + c3 + 1 = 0, Im c3 > 0"},
}

# c^3 + 2c^2 + c + 1, ascending
RABBIT_CENTER_POLY = [1, 1, 2, 1]

# =============================================================================
# OUTPUT
# =============================================================================

JSON_SIGNIFICANT_DIGITS = 12
SCHEMA_FILE = "report.schema.json"
TOOL_NAME = "fatou-geometry"
TOOL_VERSION = "0.1.0"

# =============================================================================
# CONFIGURATION
# Every config key with its default. `null` marks optional keys.
# =============================================================================

ACTIONS = ("analyze", "render", "shrink", "john", "holder", "lc", "summability", "catalog")

CONFIG_DEFAULTS = {
    "seed": None,  # generated (and recorded) when blank
    "threads": 1,  # 0 = all cores
    "out_dir": "out/{action}-{seed}",
    "map": {
        "preset": "chebyshev",
        "text": None,  # "num = ...; den = ..." overrides the preset
    },
    "grid": {
        "chart": "standard",
        "center": [0.0, 0.0],
        "half_width": 2.0,
        "resolution": 256,
        "max_iter": GRID_MAX_ITER,
    },
    "orbits": {
        "max_period": SOLVE_MAX_PERIOD,
        "seeds_per_axis": SOLVE_SEEDS_PER_AXIS,
        "rho_rec": RHO_REC,
        "burn_in": OMEGA_BURN_IN,
        "sample": OMEGA_SAMPLE,
    },
    "julia": {
        "method": "inverse_iteration",
        "count": 20_000,
        "burn_in": JULIA_BURN_IN,
    },
    "shrink": {
        "radii": [0.2],
        "n_max": 8,
        "samples": 8,
        "near_center": None,  # [re, im]; restricts bases to a ball
        "near_radius": None,
        "mod_cases": 20,
        "mod_n_max": 5,
    },
    "john": {
        "components": 1,  # the k largest components
        "samples": 200,
        "builder": "best_of_both",
    },
    "holder": {
        "components": 1,
        "samples": 500,
        "slope_max": HOLDER_SLOPE_MAX,
    },
    "lc": {
        "pairs": 10,
        "max_theta": 0.3,
    },
    "summability": {
        "N": 30,
        "alpha": None,
        "convention": "order",
    },
    "render": {
        "overlays": True,
        "csv": False,
    },
}

# (section, key) -> inclusive (min, max); None = unbounded on that side
CONFIG_RANGES = {
    ("", "threads"): (0, 1024),
    ("", "seed"): (0, 2**64 - 1),
    ("grid", "half_width"): (1e-12, None),
    ("grid", "resolution"): (GRID_MIN_RESOLUTION, 8192),
    ("grid", "max_iter"): (1, 1_000_000),
    ("orbits", "max_period"): (1, 12),
    ("orbits", "seeds_per_axis"): (2, 256),
    ("orbits", "rho_rec"): (1e-12, 2.0),
    ("orbits", "burn_in"): (0, ORBIT_MAX),
    ("orbits", "sample"): (1, ORBIT_MAX),
    ("julia", "count"): (1, 10_000_000),
    ("julia", "burn_in"): (0, 100_000),
    ("shrink", "n_max"): (1, 64),
    ("shrink", "samples"): (1, 100_000),
    ("shrink", "near_radius"): (1e-12, 2.0),
    ("shrink", "mod_cases"): (0, 100_000),
    ("shrink", "mod_n_max"): (1, 16),
    ("john", "components"): (0, 10_000),
    ("john", "samples"): (1, 1_000_000),
    ("holder", "components"): (0, 10_000),
    ("holder", "samples"): (1, 10_000_000),
    ("holder", "slope_max"): (0.0, None),
    ("lc", "pairs"): (0, 100_000),
    ("lc", "max_theta"): (1e-12, 2.0),
    ("summability", "N"): (1, 400),
    ("summability", "alpha"): (0.0, None),
}

CONFIG_CHOICES = {
    ("grid", "chart"): ("standard", "inverted"),
    ("julia", "method"): JULIA_METHODS,
    ("john", "builder"): JOHN_BUILDERS,
    ("summability", "convention"): MULTIPLICITY_CONVENTIONS,
}
