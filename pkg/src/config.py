import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from a .env file if present
load_dotenv()

SRC_DIR = Path(__file__).resolve().parent


def get_config(key, default=None, required=False):
    value = os.getenv(key, default)
    if required and value is None:
        raise ValueError(f"Missing required config key: {key}")
    return value


def get_bool_config(key, default="false"):
    return str(get_config(key, default=default)).strip().lower() in ("1", "true", "yes", "on")


def resolved_settings():
    """Every setting that can change output bytes, as recorded in RunRecords."""
    return {
        "NCF_PHRASE_BANK_PATH": str(
            get_config("NCF_PHRASE_BANK_PATH", default=SRC_DIR / "pattern_engine" / "data" / "phrase_bank.yaml")
        ),
        "NCF_PRESET_DIR": str(get_config("NCF_PRESET_DIR", default=SRC_DIR / "injection_planner" / "presets")),
    }
