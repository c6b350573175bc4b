import csv
import math
from io import StringIO

import numpy as np

from ubp.plugins import FormatPlugin


def _cell(value):
    if isinstance(value, np.generic):
        value = value.item()
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


class CSV(FormatPlugin):
    id = "csv"
    description = "CSV"

    def __init__(self, document):
        self.rows = document.table

    def generate(self):
        file = StringIO()
        writer = csv.writer(file, lineterminator="\n")

        writer.writerows([[_cell(value) for value in row] for row in self.rows])

        return file.getvalue()
