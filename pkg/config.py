from pathlib import Path
from dotenv import load_dotenv
import os

from utils.constants import MeasurementDefaults, PenaltySchedule

ROOT_DIR = Path(__file__).parent
load_dotenv(ROOT_DIR / '.env')

class Settings:
    # Measurement cadence and matching
    RTT_PERIOD: int = int(os.environ.get('RTT_PERIOD', MeasurementDefaults.RTT_PERIOD))
    TOLERANCE_WINDOW: int = int(os.environ.get('TOLERANCE_WINDOW', MeasurementDefaults.TOLERANCE_WINDOW))
    TIME_SHIFT: int = int(os.environ.get('TIME_SHIFT', 0))

    # Changepoint detection
    ELBOW_SLOPE_THRESHOLD: float = float(os.environ.get('ELBOW_SLOPE_THRESHOLD', 10000))
    PENALTY_BASE: float = float(os.environ.get('PENALTY_BASE', PenaltySchedule.BASE))
    PENALTY_OFFSET: float = float(os.environ.get('PENALTY_OFFSET', PenaltySchedule.OFFSET))
    INITIAL_PENALTY: float = float(os.environ.get('INITIAL_PENALTY', PenaltySchedule.INITIAL))
    MAX_ELBOW_ITERATIONS: int = int(os.environ.get('MAX_ELBOW_ITERATIONS', PenaltySchedule.MAX_ITERATIONS))

    # Aggregation
    JACCARD_THRESHOLD: float = float(os.environ.get('JACCARD_THRESHOLD', 0.7))

    # Runtime
    JOBS: int = int(os.environ.get('JOBS', 1))
    LOG_LEVEL: str = os.environ.get('LOG_LEVEL', 'INFO').upper()

settings = Settings()
