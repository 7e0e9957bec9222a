"""Linguistically regularized LSTM sentiment classifiers."""
