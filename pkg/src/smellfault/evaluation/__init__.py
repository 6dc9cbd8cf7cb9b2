from .folds import FoldPlan, stratified_folds
from .metrics import ConfusionCounts, aggregate, confusion, f1_score, metrics
