"""gradlab: gradient attribution laboratory (SmoothGrad, AdaptGrad and friends)."""

__version__ = "0.1.0"
