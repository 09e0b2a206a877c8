"""Next teacher talk move prediction: corpus tooling, a three-encoder
recurrent classifier with a from-scratch float64 training core, reference
baselines, evaluation and annotation-study harnesses, and an HTTP service.
"""

from .labels import Facet, TalkMove, facet_of

__version__ = "0.1.0"

__all__ = ["Facet", "TalkMove", "facet_of", "__version__"]
