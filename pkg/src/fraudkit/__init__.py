"""Fraud detection toolkit for extremely imbalanced transaction data."""

from .dataset import FoldAssignment, LabeledDataset, TimeFrameSplit, load_csv, split_time_frames, stratified_kfold
from .forest import ForestModel, ForestParams, train_forest, train_tree
from .imbalance import KSubEnsemble, cluster_centroids, partition_majority, random_undersample, train_ksub
from .metrics import ConfusionCounts, MetricReport, evaluate

__version__ = "0.1.0"
