"""Plugin exporting something that is not an Encoder."""

ENCODERS = {
    "not-an-encoder": object,
}
