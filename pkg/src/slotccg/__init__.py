"""Grounded CCG semantic parsing for cloze-style entity slot filling."""

from .categories import Category, CoindexedCategory, coindex, parse_category
from .corpus import CorpusRecord, load_corpus
from .grounding import CandidateSet, filter_candidates, ground
from .kb import GroundedGraph, KnowledgeBase, execute, load_kb
from .lexicon import Lexicon, constrain_lexicon, induce_categories
from .parser import Derivation, ParseConfig, Token, apply_combinator, parse
from .ranker import PerceptronModel, featurize, predict, train
from .semantics import UngroundedGraph, compose, lexical_semantics, validate

__version__ = "0.1.0"

__all__ = [
    "Category", "CoindexedCategory", "coindex", "parse_category",
    "CorpusRecord", "load_corpus",
    "CandidateSet", "filter_candidates", "ground",
    "GroundedGraph", "KnowledgeBase", "execute", "load_kb",
    "Lexicon", "constrain_lexicon", "induce_categories",
    "Derivation", "ParseConfig", "Token", "apply_combinator", "parse",
    "PerceptronModel", "featurize", "predict", "train",
    "UngroundedGraph", "compose", "lexical_semantics", "validate",
]
