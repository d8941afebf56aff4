"""Gait event detection and spatial-temporal gait parameters from two-foot
inertial + plantar-pressure insoles."""

from .config import Config, load_config, parse_config
from .errors import GaitError, InputError
from .pipeline import Analysis, analyze_session
from .signal_model import FootStream, GaitSession, parse_log, serialize_log
from .synth import GaitProfile, generate, profile_by_name

__all__ = [
    "Analysis", "Config", "FootStream", "GaitError", "GaitProfile", "GaitSession", "InputError",
    "analyze_session", "generate", "load_config", "parse_config", "parse_log", "profile_by_name",
    "serialize_log",
]
