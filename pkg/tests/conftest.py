import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mwdmatch import gbdt
from mwdmatch.detector import SimilarityModel
from mwdmatch.gbdt import TrainConfig
from mwdmatch.lessons import build_pair_dataset, database_from_corpus
from mwdmatch.synthgen import AccidentType, OperationType, generate_corpus

# lightweight corpus for module-level tests: 4 populated groups, 3 lessons each
SMALL_COMPOSITION = {
    (AccidentType.STUCK, OperationType.DRILLING): 3,
    (AccidentType.STUCK, OperationType.TRIPPING_IN): 3,
    (AccidentType.WASHOUT, OperationType.DRILLING): 3,
    (AccidentType.MUD_LOSS, OperationType.DRILLING): 3,
}

QUICK_TRAIN = TrainConfig(n_trees=60, max_depth=3, seed=5)


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(seed=11, composition=SMALL_COMPOSITION)


@pytest.fixture(scope="session")
def small_db(small_corpus):
    return database_from_corpus(small_corpus)


@pytest.fixture(scope="session")
def small_model(small_db):
    X, y, _ = build_pair_dataset(small_db)
    return gbdt.fit(X, y, QUICK_TRAIN, layout_hash=small_db.window_config.pair_layout_hash())


@pytest.fixture(scope="session")
def small_sim(small_model, small_db):
    return SimilarityModel(small_model, small_db.window_config)
