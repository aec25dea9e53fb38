"""Two-phase maximum-likelihood sequence estimation for receivers with partial CSI."""

from .complexity import ComplexityModel, complexity_model
from .config import Scenario, Scheme, SimConfig, load_config
from .estimation import ls_estimate, lms_step_size, lms_update
from .harness import run_sweep, run_trial
from .metrics import Criterion, MetricBreakdown, evaluate_metrics, exhaustive_decode
from .report import emit_outputs
from .signal import TransmitBlock, build_matrices, ebn0_to_noise_var, psk_modulate, transmit
from .trellis import Trellis, conventional_mlse, forward_pass, lms_mlse
from .twophase import backward_pass, lambda_correction, two_phase_decode

__version__ = "0.1.0"
