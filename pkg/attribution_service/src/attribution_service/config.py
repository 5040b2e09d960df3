"""Service configuration and the model weight pin.

The model is constructed from a fixed seed; PINNED_MODEL_HASH is the SHA-256
over its parameter bytes. The health endpoint reports the live hash so
clients can verify they are talking to the expected weights.
"""

PINNED_MODEL_HASH = "c7139929205cbd82f1b3e51fa7b5162efec134639de27947e805c3fc55970491"

HOST = "127.0.0.1"
PORT = 9100
