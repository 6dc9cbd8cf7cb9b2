from .boosting import AdaBoostModel, train_adaboost
from .preprocessing import StandardizationParams, oversample, standardize_apply, standardize_fit
from .svm import SvmModel, TrainingError, train_svm_sgd
from .threshold import ThresholdClassifier, VotingEnsemble, nearest_rank, train_threshold, vote
from .tree import DecisionTree, best_split, train_tree
