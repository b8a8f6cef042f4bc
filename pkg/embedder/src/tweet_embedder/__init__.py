"""tweet-embedder: batch sentence encoding of filtered tweets into EMB1 stores."""

__version__ = "0.1.0"

from .encoder import Encoder, EncoderChoice, ModelUnavailableError  # noqa: F401
