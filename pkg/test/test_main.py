# encoding: utf-8-sig

import argparse
import shutil
import tempfile
import pytest
from unittest.mock import patch, MagicMock
from pathlib import Path

import pandas as pd

# Import the main module
import pwlnash.__main__ as main_module
from pwlnash.bench import Method, ProfileCurve, RunRecord
from pwlnash.errors import ParameterError
from pwlnash.game import CostKind, GciInstance


def sample_record(status="Solved"):
    return RunRecord(instance_id="gci_m2_n2_log_s0", m=2, n=2, cost_kind=CostKind.LOG, method=Method.DIRECT,
                     status=status, wall_time_s=1.5, iterations_stage1=4, certified_regret=2e-5)


def solve_args(**overrides):
    values = dict(instance=None, m=2, n=2, kind='log', seed=0, method='direct', delta_f=1e-4, mu=0.5,
                  delta_0=0.05, time_limit=900.0, jobs=1, out='solution.json', results=None)
    values.update(overrides)
    return argparse.Namespace(**values)


class TestMain:
    """Test class for main module functions"""

    @pytest.fixture
    def temp_dir(self):
        temp_dir = tempfile.mkdtemp()
        yield Path(temp_dir)

        if Path(temp_dir).exists():
            shutil.rmtree(temp_dir)

    def test_main_module_import(self):
        """Test that main module can be imported without errors"""
        assert main_module is not None

    @pytest.mark.parametrize("argv, handler", [
        (['pwlnash', 'generate', '--m', '2', '--n', '2'], 'handle_generate'),
        (['pwlnash', 'solve'], 'handle_solve'),
        (['pwlnash', 'certify', '-i', 'inst.json'], 'handle_certify'),
        (['pwlnash', 'bench'], 'handle_bench'),
        (['pwlnash', 'profile'], 'handle_profile'),
        (['pwlnash', 'stats'], 'handle_stats'),
    ])
    @patch('pwlnash.__main__.get_logger')
    def test_main_dispatches_command(self, mock_get_logger, argv, handler):
        with patch('sys.argv', argv), patch(f'pwlnash.__main__.{handler}') as mock_handler:
            main_module.main()

            mock_handler.assert_called_once()

    @patch('pwlnash.__main__.get_logger')
    @patch('sys.argv', ['pwlnash', '-h'])
    def test_main_help(self, mock_get_logger):
        with pytest.raises(SystemExit) as exc:
            main_module.main()
        assert exc.value.code == 0

    @patch('pwlnash.__main__.get_logger')
    @patch('sys.argv', ['pwlnash'])
    def test_main_without_command_prints_help(self, mock_get_logger, capsys):
        main_module.main()

        assert "usage: pwlnash" in capsys.readouterr().out
        mock_get_logger.assert_not_called()

    @patch('pwlnash.__main__.get_logger')
    @patch('sys.argv', ['pwlnash', 'stats', '-v', '2'])
    def test_main_with_verbose_logging(self, mock_get_logger):
        with patch('pwlnash.__main__.handle_stats'):
            main_module.main()

        mock_get_logger.assert_called_once_with(verbose_level=2)

    @patch('pwlnash.__main__.get_logger')
    def test_main_missing_file_exits(self, mock_get_logger, temp_dir, capsys):
        argv = ['pwlnash', 'certify', '-i', str(temp_dir / 'missing.json')]
        with patch('sys.argv', argv):
            with pytest.raises(SystemExit) as exc:
                main_module.main()

        assert exc.value.code == 1
        assert "Error: File not found" in capsys.readouterr().err

    @patch('pwlnash.__main__.get_logger')
    def test_main_invalid_json_exits(self, mock_get_logger, temp_dir, capsys):
        inst_file = temp_dir / 'broken.json'
        inst_file.write_text("{not json", encoding='utf-8')
        with patch('sys.argv', ['pwlnash', 'certify', '-i', str(inst_file)]):
            with pytest.raises(SystemExit) as exc:
                main_module.main()

        assert exc.value.code == 1
        assert "Error: Invalid JSON" in capsys.readouterr().err

    @pytest.mark.parametrize("error, prefix", [
        (ParameterError("mu must lie in (0, 1)"), "Error: mu must lie"),
        (PermissionError("results.csv"), "Error: Permission denied"),
        (RuntimeError("lock busy"), "Error: lock busy"),
        (KeyError("players"), "Exception: 'players'"),
    ])
    @patch('pwlnash.__main__.get_logger')
    @patch('sys.argv', ['pwlnash', 'solve'])
    def test_main_errors_exit_with_status_1(self, mock_get_logger, error, prefix, capsys):
        with patch('pwlnash.__main__.handle_solve', side_effect=error):
            with pytest.raises(SystemExit) as exc:
                main_module.main()

        assert exc.value.code == 1
        assert prefix in capsys.readouterr().err

    @patch('pwlnash.__main__.generate_instance_file')
    def test_handle_generate(self, mock_generate):
        mock_generate.return_value = MagicMock(instance_id="gci_m3_n2_ncf_s42")
        args = argparse.Namespace(m=3, n=2, kind='ncf', seed=42, out='g.json')

        with patch('builtins.print') as mock_print:
            main_module.handle_generate(args)

        mock_generate.assert_called_once_with(m=3, n=2, kind='ncf', seed=42, out_file='g.json')
        assert "gci_m3_n2_ncf_s42" in mock_print.call_args[0][0]

    @patch('pwlnash.__main__.solve_instance_file')
    def test_handle_solve_generates_instance(self, mock_solve):
        mock_solve.return_value = sample_record()

        with patch('builtins.print') as mock_print:
            main_module.handle_solve(solve_args())

        instance = mock_solve.call_args[0][0]
        assert isinstance(instance, GciInstance)
        assert instance.instance_id == "gci_m2_n2_log_s0"
        assert mock_solve.call_args[0][1] is Method.DIRECT
        assert "Solved" in mock_print.call_args[0][0]

    @patch('pwlnash.__main__.solve_instance_file')
    def test_handle_solve_with_instance_file(self, mock_solve):
        mock_solve.return_value = sample_record("TimeLimit")

        with patch('builtins.print'):
            main_module.handle_solve(solve_args(instance='inst.json', method='twolevel', jobs=2, results='r.csv'))

        mock_solve.assert_called_once_with('inst.json', Method.TWOLEVEL, 'solution.json', delta_f=1e-4, mu=0.5,
                                           delta_0=0.05, time_limit_s=900.0, workers=2, results_file='r.csv')

    @patch('pwlnash.__main__.certify_solution_file')
    def test_handle_certify(self, mock_certify):
        mock_certify.return_value = 1.25e-5
        args = argparse.Namespace(instance='inst.json', solution='sol.json', delta_f=None)

        with patch('builtins.print') as mock_print:
            main_module.handle_certify(args)

        mock_certify.assert_called_once_with('inst.json', 'sol.json', None)
        mock_print.assert_called_once_with("certified regret 1.25e-05")

    @patch('pwlnash.__main__.bench_to_csv')
    def test_handle_bench(self, mock_bench):
        mock_bench.return_value = [sample_record(), sample_record("TimeLimit")]
        args = argparse.Namespace(m=[2], n=[2, 3], kind=['log'], instances=2, method=['sgm', 'direct'], seed=5,
                                  delta_f=1e-4, mu=0.5, delta_0=0.05, time_limit=60.0, jobs=1, out='r.csv')

        with patch('builtins.print') as mock_print:
            main_module.handle_bench(args)

        plan = mock_bench.call_args[0][0]
        assert plan.ns == (2, 3)
        assert plan.kinds == (CostKind.LOG,)
        assert plan.methods == (Method.SGM, Method.DIRECT)
        assert len(plan.instances()) == 4
        mock_print.assert_called_once_with("2 runs in r.csv (1 solved)")

    @patch('pwlnash.__main__.profiles_from_csv')
    def test_handle_profile(self, mock_profiles):
        curve = ProfileCurve(method="sgm", points=((1.0, 0.5), (2.0, 1.0)))
        mock_profiles.return_value = ({"sgm": curve}, [Path("p.svg"), Path("p.csv")])
        args = argparse.Namespace(results='r.csv', out='p.svg')

        with patch('builtins.print') as mock_print:
            main_module.handle_profile(args)

        printed = [call[0][0] for call in mock_print.call_args_list]
        assert printed[0] == "sgm: solved fraction 1.000"
        assert len(printed) == 3

    @patch('pwlnash.__main__.stats_from_csv')
    def test_handle_stats_empty(self, mock_stats):
        mock_stats.return_value = pd.DataFrame()
        args = argparse.Namespace(results='r.csv', out=None)

        with patch('builtins.print') as mock_print:
            main_module.handle_stats(args)

        mock_print.assert_called_once_with("No runs found.")
