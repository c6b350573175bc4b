import json
import math

import numpy as np

from ubp.plugins import FormatPlugin


def _plain(value):
    """JSON-safe copy: numpy values become Python ones, non-finite floats become null."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class JSON(FormatPlugin):
    id = "json"
    description = "JSON"

    def __init__(self, document):
        self.payload = document.payload

    def generate(self):
        return json.dumps(_plain(self.payload), indent=2, sort_keys=True) + "\n"
