"""Ringworm detection from skin-texture LBP histograms.

The pipeline: grayscale PGM images are normalized (:mod:`ringworm.imageio`),
turned into rotation-invariant uniform LBP code maps (:mod:`ringworm.lbp`),
summarized as 16 region histograms of 10 bins (:mod:`ringworm.features`) and
classified by Gaussian naive Bayes, an MLP and a kernel SVM whose votes are
combined by majority (:mod:`ringworm.classifiers`). :mod:`ringworm.eval`
holds the holdout / k-fold protocol and :mod:`ringworm.cli` the command line.
"""

__version__ = "0.1.0"
