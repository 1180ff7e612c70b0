"""Quality metrics and monitoring for human-tagged training data."""

from .errors import (
    DegenerateAgreementError,
    InsufficientDataError,
    TagQualityError,
    ValidationError,
)
from .metrics import (
    AgreementReport,
    Scale,
    TagMatrix,
    TagRecord,
    build_matrix,
    coincidence_matrix,
    cohens_kappa,
    interpret_agreement,
    krippendorff_alpha,
    percent_agreement,
    squared_difference,
)
from .monitoring import (
    allocate_monitoring_items,
    evaluate_design_round,
    extract_disagreements,
    run_monitoring,
)
from .rolling import RollingConfig, assess_burnin, detect_convergence, moving_average, moving_variance
from .simulation import SimulationConfig, generate_batch, simulate_study

__version__ = "0.1.0"
