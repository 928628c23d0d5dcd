# Binary formats
DATASET_MAGIC = b"TCDS"
DATASET_VERSION = 1
CHECKPOINT_MAGIC = b"TCVB"
CHECKPOINT_VERSION = 1

# Numerics
SERIES_SWITCH = 1e-8  # below this |x|, (e^x - 1)/x uses its Taylor series
VARIANCE_CLAMP_TOL = 1e-14
SINGULAR_VARIANCE = 1e-300
RIDGE = 1e-12
MAX_CONDITION = 1e12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100

# Metrics
DATA_RANGE = 2.0
PSNR_CAP = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# Config file
SIDECAR_SUFFIX = ".meta.txt"
