from pathlib import Path
import yaml

CONFIG_PATH = Path(__file__).resolve().parents[1] / "config" / "analyzer_config.yaml"


def test_consolidated_sections():
    with open(CONFIG_PATH, "r", encoding="utf-8") as f:
        cfg = yaml.safe_load(f)
    for section in ("limits", "logging", "cache", "fuzz", "ansatz", "templates"):
        assert section in cfg
    assert cfg["limits"]["max_edges"] == 30
    assert cfg["limits"]["env_override"] == "RC_MAX_EDGES"
    assert len(cfg["ansatz"]["grid"]) == 11
