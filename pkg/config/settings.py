"""
Application Configuration
Centralized settings management with environment variable support
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent

# Scale factor for pixel data (extracted edge points)
F0 = float(os.getenv('F0', 100.0))

# Scale factor for synthetic scenes (unit-scale geometry)
SYNTHETIC_F0 = float(os.getenv('SYNTHETIC_F0', 1.0))

# Monte Carlo Configuration
SEED = int(os.getenv('SEED', 20240101))
RUNS = int(os.getenv('RUNS', 10000))
WORKERS = int(os.getenv('WORKERS', 1))

# Numerical tolerances
PINV_THRESHOLD = float(os.getenv('PINV_THRESHOLD', 1e-6))  # relative to largest eigenvalue
# relative to ||M||_2 / ||N||_2 of the pencil
POSITIVE_EIG_TOL = float(os.getenv('POSITIVE_EIG_TOL', 1e-16))
# M is singular when lambda_min <= KERNEL_EPS_MULTIPLE * dim * eps * lambda_max
KERNEL_EPS_MULTIPLE = float(os.getenv('KERNEL_EPS_MULTIPLE', 4.0))
DEFLATION_TOL = float(os.getenv('DEFLATION_TOL', 1e-12))
PROPORTIONAL_TOL = float(os.getenv('PROPORTIONAL_TOL', 1e-9))
PENCIL_RESIDUAL_TOL = float(os.getenv('PENCIL_RESIDUAL_TOL', 1e-8))

# Output Configuration
CSV_FLOAT_FORMAT = os.getenv('CSV_FLOAT_FORMAT', '%.17g')

# Logging Configuration
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()
LOG_DIR = os.getenv('LOG_DIR', str(BASE_DIR / 'logs'))
LOG_TO_FILE = os.getenv('LOG_TO_FILE', 'true').lower() == 'true'

# Fit Service Configuration
SERVICE_HOST = os.getenv('SERVICE_HOST', '0.0.0.0')
SERVICE_PORT = int(os.getenv('SERVICE_PORT', 8001))
CORS_ORIGINS = os.getenv('CORS_ORIGINS', '*').split(',')
