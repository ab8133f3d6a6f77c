"""EEG motor and motor-imagery trial classification: features, selection, classifiers, evaluation."""

__version__ = "0.1.0"
