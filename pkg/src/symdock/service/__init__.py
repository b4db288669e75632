from symdock.service.client import SynthesisClient, client_call
from symdock.service.protocol import (
    PROTOCOL_VERSION,
    SynthRequest,
    SynthResponse,
    decode,
    encode,
)
from symdock.service.server import SynthesisServer, serve


__all__ = [
    "PROTOCOL_VERSION",
    "SynthRequest",
    "SynthResponse",
    "SynthesisClient",
    "SynthesisServer",
    "client_call",
    "decode",
    "encode",
    "serve",
]
