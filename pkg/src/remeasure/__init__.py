"""Interactive differentially-private exploratory analysis engine.

Measure linear counting workloads under epsilon-DP, remeasure to fuse all
cached noisy answers into strictly-lower-error estimates, track the privacy
budget, score probabilistic answers with proper scoring rules, and benchmark
analyst behavior against rational-agent baselines.
"""

__version__ = "0.1.0"
