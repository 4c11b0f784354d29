from pathlib import Path
from multiprocessing import cpu_count

# Get path information about this module
current_dir = Path(__file__).parent #__file__ gets the location of this file.

# Paths to data sources
path_data = current_dir.with_name('data') # data path relative to the toolbox
path_catalog = path_data / "catalog"

# Where the batch scripts write their tables
path_output = Path.home() / "Documents" / "equiaffine"

# Jets
jet_order = 4 # kappa_r'' needs four t-derivatives of the curve
jet_threshold = 1e-12 # leading coefficient floor for div, cbrt, abs-sqrt

# Metric and curve classification
metric_threshold = 1e-12 # relative to (scale of g components)^2
classify_threshold = 1e-10 # singular / geodesic, scaled by the local magnitudes
relation_threshold = 1e-8 # |kappa_r| floor for the curvature relation

# Quadrature for the arclength integrals
quad_tol = 1e-10
quad_limit = 200

# Finite-difference oracle
fd_step = 1e-5 # first derivatives, times max(1, |t|)
fd_step2 = 2e-3 # second derivatives, times max(1, |t|)
fd_outer_step = 1e-3 # first derivatives of oracle-computed quantities
fd_outer_step2 = 5e-2 # second derivatives of oracle-computed quantities

# Verification tolerances
tol_relation = 1e-7
tol_ode = 1e-7
tol_formula = 1e-7 # explicit and frame kappa_a against the intrinsic one, relative
tol_identity = 1e-7
tol_frenet = 1e-8
tol_oracle = 1e-4
tol_structure = 1e-9

# Grid evaluation
threads = 1 # library default, the cli uses every core
cli_threads = cpu_count()
grid_count = 50

# Logging
log_format = '%(asctime)s %(name)s %(levelname)s: %(message)s'
log_level = 'WARNING'

# Output tables
float_format = '%.17g'
