"""Low-resource name transliteration with a hard-monotonic-attention transducer
bootstrapped by constrained discovery."""

from .align import STEP, align, execute_actions, oracle_actions
from .bootstrap import BootstrapConfig, bootstrap, check_constraints, mine
from .decoding import beam_search, infer_dict_constrained, infer_unconstrained
from .evaluation import acc_at_1, generate_candidates, recall_at_k
from .model import ModelParams, TrainConfig, train
from .text import (
    Alphabet, ForeignVocab, NameDictionary, NamePair, build_alphabet, cv_split, normalize,
)

__version__ = "0.1.0"
