"""
This module is part of the mapruin package

Results reach the formatter as a response dictionary

    {'title': str, 'columns': [...], 'rows': [[...], ...], 'record': {...}}

`columns`/`rows` feed the table and csv formats, `record` is the structured
document printed by the record format (it defaults to the table itself).

:copyright: (c) 2018 by Happy Gears, Inc
:license: Apache2, see LICENSE for more details.
"""

import io
import json
import math

import numpy as np
import pandas as pd
from tabulate import tabulate

from . import run_config

TABLE_FLOAT_FORMAT = '.6g'


def to_jsonable(value):
    """numpy arrays and scalars, named tuples and tuple keys converted to plain json types"""
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, '_asdict'):
        return to_jsonable(value._asdict())
    if isinstance(value, dict):
        return {(k if isinstance(k, str) else str(k)): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def shortest_repr(value):
    return repr(float(value))


def transform_value(value):
    if value is None:
        return 'NULL'
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return 'nan'
    if isinstance(value, str):
        return value.rstrip()
    return value


class ResponseFormatter(object):
    def __init__(self, output_format=run_config.FORMAT_TABLE, out=None):
        super(ResponseFormatter, self).__init__()
        self.output_format = output_format
        self.out = out

    def format(self, resp):
        if self.output_format == run_config.FORMAT_RECORD:
            return self.format_record(resp)
        if self.output_format == run_config.FORMAT_CSV:
            return self.format_csv(resp)
        return self.format_table(resp)

    def format_table(self, resp):
        columns = resp.get('columns', [])
        rows = [[transform_value(v) for v in row] for row in resp.get('rows', [])]
        text = tabulate(rows, columns, tablefmt='fancy_outline', floatfmt=TABLE_FLOAT_FORMAT)
        title = resp.get('title')
        if title:
            text = '{0}\n{1}'.format(title, text)
        return text

    def format_csv(self, resp):
        """floats are written with repr, the shortest string that reads back to the same value"""
        frame = pd.DataFrame(resp.get('rows', []), columns=resp.get('columns', []))
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format=shortest_repr)
        return buffer.getvalue().rstrip('\n')

    def format_record(self, resp):
        record = resp.get('record')
        if record is None:
            record = {'columns': resp.get('columns', []), 'rows': resp.get('rows', [])}
        return json.dumps(to_jsonable(record), sort_keys=True)

    def print_response(self, resp):
        text = self.format(resp)
        if self.out:
            with open(self.out, 'w') as fh:
                fh.write(text + '\n')
        else:
            print(text)


