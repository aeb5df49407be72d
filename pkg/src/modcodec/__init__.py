"""modcodec: a lossless/near-lossless Modular image codec in pure numpy.

Typical use::

    from modcodec import encode_image, decode_image
    data = encode_image(pixels, effort=7)
    assert (decode_image(data) == pixels).all()
"""

from .container.codec import (
    EncodeOptions,
    decode_image,
    decode_progressive,
    decode_roi,
    encode_image,
    encode_with_info,
    inspect_stream,
)
from .container.headers import ImageHeader
from .errors import CodecError, CorruptStreamError, EndOfStreamError, InvalidRequestError, \
    UnsupportedError

__all__ = [
    "EncodeOptions", "ImageHeader", "encode_image", "encode_with_info", "decode_image",
    "decode_roi", "decode_progressive", "inspect_stream", "CodecError", "CorruptStreamError",
    "EndOfStreamError", "InvalidRequestError", "UnsupportedError",
]
