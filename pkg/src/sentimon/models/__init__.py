"""Classifiers, grid search and model artifacts."""
from .base import Prediction, TrainConfig
from .bundle import KINDS, NB, ModelBundle, TrainSummary, train_bundle
from .linear import LOGISTIC, SVM, LinearModel, logreg_objective, svm_objective, train_logreg, train_svm
from .naive_bayes import NaiveBayesModel, train_nb
from .persistence import dumps_model, load_model, loads_model, save_model
from .selection import DEFAULT_FOLDS, DEFAULT_GRID, GridSearchResult, grid_search, stratified_folds


def predict(model, x) -> Prediction:
    """Classify one sparse vector with any trained classifier."""
    return model.predict(x)


__all__ = [
    "KINDS", "LOGISTIC", "NB", "SVM", "DEFAULT_FOLDS", "DEFAULT_GRID",
    "GridSearchResult", "LinearModel", "ModelBundle", "NaiveBayesModel", "Prediction",
    "TrainConfig", "TrainSummary",
    "dumps_model", "grid_search", "load_model", "loads_model", "logreg_objective", "predict",
    "save_model", "stratified_folds", "svm_objective", "train_bundle", "train_logreg",
    "train_nb", "train_svm",
]
