"""Cognitive workload sensing from EEG, gaze, and pupil recordings."""

__version__ = "0.1.0"

from .config import DEFAULTS, RunConfig, load_config
from .signals import TimeSeries, WindowPlan, make_window_plan, trim_edges
from .spectral import BandSpec, Spectrogram, SsdResult, bandpass, band_power, detect_iaf, ssd, stft_power
from .eeg import (
    BlinkReport,
    PowerCourse,
    band_course,
    count_blinks,
    iaf_course,
    normalize_course,
    theta_alpha_ratio,
    theta_course,
)
from .gaze import (
    GazeTrace,
    PursuitInstance,
    TrajectoryPath,
    build_pursuit_instance,
    gen_trajectory,
    normalize_deviation,
    pupil_window_feature,
    pursuit_deviation,
    smooth_running_mean,
)
from .learn import (
    EvalReport,
    FeatureDataset,
    LinearModel,
    classification_metrics,
    decision_function,
    fit_linear_regression,
    leave_one_person_out,
    leave_one_repetition_out,
    load_model,
    lopo_regression,
    predict,
    save_model,
    train_linear_svm,
)
from .synth import Envelope, EegComponent, NBackSchedule, SynthSpec, gen_eeg, gen_gaze, gen_nback_schedule, gen_pupil
from .stream import Decision, DifficultyCommand, StreamSession, adapt_difficulty, batch_decisions, make_session, push, session_report
from .recio import load_dataset, load_recording, save_dataset, save_recording

__all__ = [name for name in dir() if not name.startswith("_")]
