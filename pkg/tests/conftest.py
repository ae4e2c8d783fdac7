import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

ARTIFACTS = pathlib.Path(__file__).parent / "_artifacts"


@pytest.fixture(scope="session")
def sac5_checkpoint():
    """Trained 5-human SAC checkpoint, cached on disk across sessions.

    Training takes ~15 minutes the first time; each later session reuses the
    saved networks. Delete tests/_artifacts/sac5 to force a retrain.
    """
    path = ARTIFACTS / "sac5"
    if not (path / "actor.mlp").exists():
        from empnav.sac import SacConfig, save_sac, train, write_train_log
        from empnav.simulation import ScenarioConfig

        ARTIFACTS.mkdir(exist_ok=True)
        scenario = ScenarioConfig(n_humans=5)
        cfg = SacConfig()
        result = train(scenario, cfg, seed=777, episodes=2000, pretrain=True)
        save_sac(path, result.nets, scenario, cfg, 777, 2000)
        write_train_log(path / "train_log.csv", result.log)
    return path
