# tests/test_importers.py

import pandas as pd
import pytest

from src.core.exceptions import ParseError
from src.infrastructure.exporters.csv_export import CsvHeader, write_csv
from src.infrastructure.exporters.report import format_report
from src.infrastructure.importers import ImporterFactory, SpectrumCSVImporter, SweepCSVImporter


class TestSweepImporter:
    def test_groups_rows_by_power(self, fixtures_dir):
        result = SweepCSVImporter().import_file(str(fixtures_dir / "sweeps.csv"))
        assert result.source_type == "SWEEP_CSV"
        assert result.row_count == 12
        high, low = result.records
        assert high.power.p_mw_dbm == 5.0
        assert low.power.p_mw_dbm == -4.0
        assert len(high.points) == 6
        assert high.points[0].sweep_time == 1e-7
        assert low.protocol_span == 25e6

    def test_nan_names_line(self, fixtures_dir):
        path = fixtures_dir / "sweeps_malformed.csv"
        with pytest.raises(ParseError) as excinfo:
            SweepCSVImporter().import_file(str(path))
        assert excinfo.value.line == 4
        assert excinfo.value.exit_code == 3
        assert "sweeps_malformed.csv:4" in str(excinfo.value)

    def test_too_few_points_per_power(self, fixtures_dir):
        with pytest.raises(ParseError, match="5dBm|5 dBm"):
            SweepCSVImporter().import_file(str(fixtures_dir / "sweeps_too_few.csv"))

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,fraction\n1e-6,0.5\n")
        with pytest.raises(ParseError) as excinfo:
            SweepCSVImporter().import_file(str(path))
        assert excinfo.value.line == 1

    def test_missing_field(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("sweep_time_s,r_up,shots,power_dbm\n1e-6,0.5,100\n")
        with pytest.raises(ParseError) as excinfo:
            SweepCSVImporter().import_file(str(path))
        assert excinfo.value.line == 2

    def test_fraction_out_of_range(self, tmp_path):
        path = tmp_path / "range.csv"
        path.write_text("sweep_time_s,r_up,shots,power_dbm\n1e-6,1.5,100,5\n")
        with pytest.raises(ParseError) as excinfo:
            SweepCSVImporter().import_file(str(path))
        assert excinfo.value.line == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            SweepCSVImporter().import_file(str(tmp_path / "absent.csv"))


class TestSpectrumImporter:
    def test_reads_frame(self, fixtures_dir):
        result = SpectrumCSVImporter().import_file(str(fixtures_dir / "spectrum.csv"))
        frame = result.records[0]
        assert result.row_count == 22
        assert frame['snapshot_index'].nunique() == 2
        assert frame['wallclock_min'].max() == 9.0

    def test_zero_shots_rejected(self, tmp_path):
        path = tmp_path / "spectrum.csv"
        path.write_text("freq_hz,r_up,shots,snapshot_index,wallclock_min\n0,0.1,0,0,0\n")
        with pytest.raises(ParseError):
            SpectrumCSVImporter().import_file(str(path))


class TestFactory:
    def test_picks_importer_from_header(self, fixtures_dir):
        factory = ImporterFactory()
        assert isinstance(factory.get_importer(str(fixtures_dir / "sweeps.csv")), SweepCSVImporter)
        assert isinstance(factory.get_importer(str(fixtures_dir / "spectrum.csv")), SpectrumCSVImporter)

    def test_unknown_file(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n")
        assert ImporterFactory().get_importer(str(path)) is None
        with pytest.raises(ParseError) as excinfo:
            ImporterFactory().import_file(str(path))
        assert excinfo.value.line == 1

    def test_import_dispatches_on_header(self, fixtures_dir):
        factory = ImporterFactory(span=20e6)
        sweeps = factory.import_file(str(fixtures_dir / "sweeps.csv"), "SWEEP_CSV")
        assert sweeps.source_type == "SWEEP_CSV"
        assert sweeps.records[0].protocol_span == 20e6
        spectrum = factory.import_file(str(fixtures_dir / "spectrum.csv"))
        assert spectrum.source_type == "SPECTRUM_CSV"
        assert spectrum.row_count == 22

    def test_wrong_kind_rejected(self, fixtures_dir):
        with pytest.raises(ParseError, match="SWEEP_CSV"):
            ImporterFactory().import_file(str(fixtures_dir / "spectrum.csv"), "SWEEP_CSV")

    def test_bad_header_reported_by_expected_importer(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# note\ntime,fraction\n1e-6,0.5\n")
        with pytest.raises(ParseError, match="expected header") as excinfo:
            ImporterFactory().import_file(str(path), "SWEEP_CSV")
        assert excinfo.value.line == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="not found"):
            ImporterFactory().import_file(str(tmp_path / "absent.csv"))


class TestExport:
    def test_csv_has_comment_header(self, tmp_path):
        path = write_csv(pd.DataFrame({'x': [0.1, 2.0]}), tmp_path / "out" / "table.csv",
                         CsvHeader(command="lz-curve", seed=3, config_hash="abc", metadata={'nu1_hz': '1e5'}))
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# tool: adiabatic-inversion ")
        assert lines[1:5] == ["# command: lz-curve", "# seed: 3", "# config_hash: abc", "# nu1_hz: 1e5"]
        assert lines[5:] == ["x", "0.1", "2"]
        frame = pd.read_csv(path, comment='#')
        assert frame['x'].tolist() == [0.1, 2.0]

    def test_report_flattens_mappings(self):
        text = format_report({'converged': True, 'b1_t': {'5dBm': 3e-5}, 'at_bound': ['t2']})
        assert text == "converged = true\nb1_t.5dBm = 3e-05\nat_bound = t2\n"
