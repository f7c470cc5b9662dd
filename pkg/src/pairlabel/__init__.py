"""Pairwise multi-label classification with local confusion-matrix
correction and information-theoretic classifier weighting."""

__version__ = "0.1.0"

from .data import (
    DatasetStats,
    MultiLabelDataset,
    SplitResult,
    compute_stats,
    generate_synthetic,
    kfold_indices,
    parse_arff,
    parse_label_xml,
    split_train_validation,
    to_arff,
)
from .ensemble import (
    PairIndex,
    aggregate_supports,
    apply_thresholds,
    build_pair_problem,
    enumerate_pairs,
    scut_fit,
    train_lpw,
)
from .correction import (
    ClassSubset,
    DecisionRegion,
    Neighborhood,
    build_class_subsets,
    build_decision_regions,
    conditional_posterior,
    corrected_supports,
    estimate_confusion,
    fuzzy_cardinality,
    neighborhood,
    rrc_probability,
)
from .experiment import TuneChoice, grid_search, run_experiment
from .learners import (
    BinaryModel,
    BinaryProblem,
    LearnerSpec,
    fit_decision_stump,
    fit_naive_bayes,
    fit_voted_perceptron,
)
from .metrics import MetricReport, PredictionSet, evaluate_all
from .pipeline import LpwModel, fit_pipeline, predict, predict_supports
from .stattests import (
    ResultTable,
    average_ranks,
    friedman_test,
    holm_adjust,
    nemenyi_cd,
    spearman_rho,
    wilcoxon_signed_rank,
)
from .weighting import (
    WeightConfig,
    joint_entropy,
    marginals,
    mutual_information,
    nmi_weight,
    normalize_joint,
)
