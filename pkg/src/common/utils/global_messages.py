class GlobalMessages:
    # Spectral Messages
    INVALID_DIMENSION = "Sequence length must be a positive integer."
    NEGATIVE_ALPHA = "Coupling scale alpha must be non-negative."
    NEGATIVE_TIME = "Time must be non-negative."
    TIME_ORDER = "Expected t <= t_prime."

    # Prior Messages
    TIME_OUT_OF_RANGE = "Time is outside the prior horizon [0, T]."
    BOUNDARY_ROWS = "Boundary term b must have one row per sequence element."
    SINGULAR_COVARIANCE = "Marginal covariance is singular at this time."
    SINGULAR_CONDITIONING = "Cannot condition on an endpoint at t_prime = 0."
    NEGATIVE_VARIANCE = "Posterior variance is negative beyond rounding tolerance."

    # Oracle Messages
    SIMULATION_DIVERGED = "Euler-Maruyama simulation produced a non-finite state."
    NOT_SYMMETRIC = "Matrix is not symmetric."
    SINGULAR_MATRIX = "Observed block of the Gaussian is singular."

    # Network Messages
    SHAPE_MISMATCH = "Array shape does not match the model configuration."
    TRAINING_DIVERGED = "Training loss became non-finite."
    WINDOW_TOO_LARGE = "Feature dimension is smaller than the SSIM window."

    # Config / IO Messages
    UNKNOWN_KEY = "Unknown configuration key."
    BAD_CONFIG_LINE = "Configuration lines must look like key=value."
    MISSING_PATH = "A required file path was not given."
    BAD_MAGIC = "File magic does not match."
    BAD_VERSION = "Unsupported file version."
    TRUNCATED = "File ended before all declared data was read."
    EMPTY_GRID = "Sweep grid must contain at least one value per axis."
    GRID_EPS = "Sweep eps values must be positive and finite."
    GRID_ALPHA = "Sweep alpha values must be non-negative and finite."
