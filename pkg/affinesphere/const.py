NAME = "affinesphere"
VERSION = "0.1.0"

ROLE_POTENTIAL = "potential"
ROLE_GRAPH = "graph"
ROLE_FACTOR = "factor"

METRIC_CENTROAFFINE = "centroaffine"
METRIC_AFFINE_RADIAL = "affine_radial"
METRIC_CALABI = "calabi"
METRIC_AFFINE_GRAPH = "affine_graph"
METRIC_KINDS = (
    METRIC_CENTROAFFINE,
    METRIC_AFFINE_RADIAL,
    METRIC_CALABI,
    METRIC_AFFINE_GRAPH,
)

# domain_core
DET_TOLERANCE = 1e-12
SINGULAR_CONDITION = 1e14
CHART_LAMBDA_MIN = 1e-8
PD_RELATIVE_TOLERANCE = 1e-10
MINIMUM_GRADIENT_TOLERANCE = 1e-6
INSIDE_MARGIN = 1e-12

# legendre
NEWTON_RELATIVE_TOLERANCE = 1e-12
NEWTON_MAX_ITERATIONS = 50
NEWTON_MAX_HALVINGS = 30
DUALITY_GAP_SLACK = 1e-12
LEGENDRE_NEIGHBORS = 4

# affine_invariants
DIFFERENCE_STEP = 1e-4
FRAME_CONDITION_MAX = 1e8
ARC_LENGTH_RELATIVE_TOLERANCE = 1e-8
ARC_LENGTH_SUBDIVISIONS = 200

# ma_solver
SOLVER_TOLERANCE = 1e-9
SOLVER_MAX_ITERATIONS = 50
SOLVER_MAX_HALVINGS = 30
LINEAR_RELATIVE_RESIDUAL = 1e-10
CONTINUATION_STAGES = (0.5, 0.75, 1.0)
MIN_NODES_PER_AXIS = 17
INTERIOR_REGION_RADIUS = 0.85
DISTANCE_INIT_SCALE = 0.1

# verify_harness
DEFAULT_SEED = 42
BAND_WIDTH_FACTOR = 10.0
SCAN_NODES_1D = 2001
SCAN_NODES_2D = 129
REFINEMENT_STABILITY = 0.2
DIVERGENCE_MIN_INCREMENT = 0.5
EXACT_ERROR = 1e-8
DIVERGENCE_MIN_MEASURED = 2
