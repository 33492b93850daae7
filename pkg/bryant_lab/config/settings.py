from dotenv import load_dotenv
import os

load_dotenv()

VERSION = "0.3.0"

BRYANT_LAB_JOBS = os.getenv("BRYANT_LAB_JOBS")
BRYANT_LAB_LOG_LEVEL = os.getenv("BRYANT_LAB_LOG_LEVEL", "WARNING")

DET_TOL = 1e-9
PATH_CLEARANCE_FACTOR = 1e-3
COEFF_FLOOR = 1e-14
JSON_SIGNIFICANT_DIGITS = 17
DEFAULT_SEED = 20240607

contour_config = {
    'nodes': 256,
    'max_doublings': 8,
    'abs_tol': 1e-12,
    'rel_tol': 1e-10,
    'radius_cap': 1.0,
    'radius_fraction': 0.5,
}

integrator_config = {
    'method': 'DOP853',
    'rtol': 1e-12,
    'atol': 1e-14,
    'step_norm_bound': 0.5,
    'min_step': 1e-13,
    'det_renormalize': False,
    'gauge_switch': 2.0,
}

loop_config = {
    'radius_factor': 0.4,
    'circle_segments': 64,
    'infinity_radius_factor': 2.5,
    'detour_attempts': 6,
}

quadrature_config = {
    'angular_nodes': 96,
    'radial_nodes': 48,
    'grid_nodes': 321,
    'partial_sum_levels': 4,
    'disk_factor': 0.45,
    'rel_tol': 1e-3,
    'divergence_cap': 1e6,
}

period_config = {
    'tol': 1e-6,
    'max_evals': 200,
    'golden_xtol': 1e-10,
    'scan_points': 21,
}

classification_config = {
    'm_bound': 12,
    'phi_grid': 201,
    'phi_margin': 1e-9,
    'nonexistence_tol': 1e-8,
    'frobenius_terms': 12,
}

mesh_config = {
    'default_res': (64, 64),
    'seam_tol': 1e-6,
    'end_inner_fraction': 0.05,
    'end_outer_fraction': 0.9,
}
