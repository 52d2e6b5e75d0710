import math

import numpy as np
import pandas as pd
import pytest

from cran_duplex.errors import DomainError
from cran_duplex.utils.csv_io import csv_body, read_csv, render_csv, write_csv
from cran_duplex.utils.gain_report import calculate_gains, summarize_region


def _region():
    p = np.linspace(0.0, 1.0, 5)
    rows = []
    for scheme, scale in (("SRA-ZF/MRT-FD", 4.0), ("SRA-HD", 2.0), ("ARA-MRC/MRT-FD", 3.0)):
        for value in p:
            ul, dl = scale * (1.0 - value), scale * value
            rows.append({"scheme": scheme, "value": value, "ul_rate": ul, "dl_rate": dl, "sum_rate": ul + dl + value * (1 - value)})
    return pd.DataFrame(rows)


class TestCsv:
    def test_metadata_block_first(self):
        frame = pd.DataFrame({"a": [1, 2], "b": [0.5, 0.25]})
        text = render_csv(frame, {"seed": 3, "note": "two\nlines"})
        lines = text.splitlines()
        assert lines[:3] == ["# seed: 3", "# note: two lines", "a,b"]
        assert csv_body(text).startswith("a,b\n")

    def test_file_round_trip(self, tmp_path):
        frame = pd.DataFrame({"scheme": ["SRA-HD"], "ul_rate": [1.5]})
        path = tmp_path / "out.csv"
        write_csv(frame, str(path), {"experiment": "point", "version": "0.3.0"})
        table, metadata = read_csv(str(path))
        assert metadata == {"experiment": "point", "version": "0.3.0"}
        pd.testing.assert_frame_equal(table, frame)

    def test_stdout(self, capsys):
        write_csv(pd.DataFrame({"x": [1]}), "-", {"k": "v"})
        assert capsys.readouterr().out == "# k: v\nx\n1\n"


class TestGainReport:
    def test_summary(self):
        summary = summarize_region(_region()).set_index("scheme")
        assert summary.loc["SRA-ZF/MRT-FD", "best_p"] == 0.5
        np.testing.assert_allclose(summary.loc["SRA-ZF/MRT-FD", "best_sum_rate"], 4.25)
        assert summary.loc["SRA-HD", "fair_p"] == 0.5
        np.testing.assert_allclose(summary.loc["SRA-HD", "max_min_rate"], 1.0)

    def test_gains(self):
        gains = calculate_gains(_region())
        assert gains["fd_best_sum_rate"] == 4.25
        assert gains["gain_over_hd_pct"] == round(100.0 * (4.25 - 2.25) / 2.25, 2)
        assert gains["gain_over_ara_pct"] == round(100.0 * (4.25 - 3.25) / 3.25, 2)
        assert len(gains["schemes"]) == 3

    def test_zero_baseline(self):
        region = _region()
        region.loc[region["scheme"] == "SRA-HD", ["ul_rate", "dl_rate", "sum_rate"]] = 0.0
        assert math.isinf(calculate_gains(region)["gain_over_hd_pct"])

    def test_missing_scheme_or_columns(self):
        with pytest.raises(DomainError):
            calculate_gains(_region(), hd_scheme="ARA-HD")
        with pytest.raises(DomainError):
            summarize_region(_region().drop(columns=["sum_rate"]))
