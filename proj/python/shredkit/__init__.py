"""Guitar tablature token toolkit."""

try:
    from . import _shredkit as _ext
except ImportError:  # build-tree layout: extension beside, not inside, the package
    import _shredkit as _ext

from_ext = (
    "ShredkitError",
    "canonicalize",
    "token_kind",
    "validate",
    "note_durations",
    "techniques",
    "pitch_class_counts",
    "pitch_class_entropy",
    "scale_consistency",
    "kld",
    "kruskal_wallis",
    "chi_square_sf",
    "StyleModel",
    "NaiveBayes",
    "synth",
    "analyze",
    "report",
)
globals().update({name: getattr(_ext, name) for name in from_ext})
__version__ = _ext.__version__
__all__ = list(from_ext)
del from_ext
