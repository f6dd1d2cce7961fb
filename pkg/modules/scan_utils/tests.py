#!/usr/bin/env python

import io
import sys
import tempfile
import unittest
import contextlib
from pathlib import Path
from unittest import mock

from . import (
    REPO_ROOT,
    SimpleTee,
    tee_streams,
    get_run_directory,
    get_run_identifier,
    check_required_libraries,
)


class TestRepoRoot(unittest.TestCase):
    def test_repo_root_contains_libraries_list(self) -> None:
        # Catches the file which computes REPO_ROOT being moved without an
        # update to the computation.
        libraries = REPO_ROOT / 'libraries.txt'
        self.assertTrue(libraries.exists(), f"{libraries} should exist")
        self.assertTrue((REPO_ROOT / 'modules').is_dir(), "modules/ should be a directory")


class TestRunDirectory(unittest.TestCase):
    def test_identifier_is_filename_safe(self) -> None:
        identifier = get_run_identifier()
        self.assertNotIn(':', identifier)
        self.assertNotIn('/', identifier)

    def test_directory_named_for_command(self) -> None:
        directory = get_run_directory('simulate')
        self.assertTrue(directory.name.startswith('simulate-'), directory)
        self.assertTrue(directory.is_absolute(), directory)


class TestSimpleTee(unittest.TestCase):
    def test_passes_content_through(self) -> None:
        out1 = io.StringIO()
        out2 = io.StringIO()

        tee = SimpleTee(out1, out2)
        tee.write("Coverage\n")
        tee.write("Stitch\n")
        tee.write("Done")

        self.assertEqual(
            "Coverage\nStitch\nDone",
            out1.getvalue(),
            "First stream has wrong content",
        )

        self.assertEqual(
            "Coverage\nStitch\nDone",
            out2.getvalue(),
            "Second stream has wrong content",
        )

    def test_prefix_on_newline(self) -> None:
        out = io.StringIO()

        tee = SimpleTee(out, prefix='@')

        tee.write("Bases\n")
        self.assertEqual(
            "@Bases\n",
            out.getvalue(),
            "Stream has wrong content after first line",
        )

        tee.write("Views")

        self.assertEqual(
            "@Bases\n@Views",
            out.getvalue(),
            "Stream has wrong content after starting second line",
        )

        tee.write("\n\nABC")

        self.assertEqual(
            "@Bases\n@Views\n@\n@ABC",
            out.getvalue(),
            r"Stream has wrong content after content with leading '\n'",
        )

    def test_tee_streams(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            log = Path(directory) / 'run-log.txt'
            with contextlib.redirect_stdout(io.StringIO()) as new_stdout:
                with contextlib.redirect_stderr(io.StringIO()) as new_stderr:
                    with tee_streams(log, prefix='scan:'):
                        print('To Stdout')  # noqa:T001
                        print('To Stderr', file=sys.stderr)  # noqa:T001

                    self.assertIs(new_stdout, sys.stdout, "Should restore stdout")
                    self.assertIs(new_stderr, sys.stderr, "Should restore stderr")

            self.assertEqual(
                'scan:To Stdout\n',
                new_stdout.getvalue(),
                "Should have still sent the output to the 'real' stdout",
            )

            self.assertEqual(
                'scan:To Stderr\n',
                new_stderr.getvalue(),
                "Should have still sent the output to the 'real' stderr",
            )

            self.assertEqual(
                'scan:To Stdout\nscan:To Stderr\n',
                log.read_text(),
                "Should have sent all to the log file",
            )

    def test_tee_streams_restores_after_error(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            stdout = sys.stdout
            with self.assertRaises(RuntimeError):
                with tee_streams(Path(directory) / 'run-log.txt'):
                    raise RuntimeError("failed")
            self.assertIs(stdout, sys.stdout)


class TestRequiredLibraries(unittest.TestCase):
    def test_missing_library(self) -> None:
        with tempfile.TemporaryDirectory(dir=REPO_ROOT) as directory:
            path = Path(directory) / 'libraries.txt'
            path.write_text('# comment\n\nno-such-package-for-scanning==1.0\n')
            with self.assertRaises(RuntimeError) as context:
                check_required_libraries(path)

        self.assertIn('no-such-package-for-scanning', str(context.exception))

    def test_satisfied(self) -> None:
        with tempfile.TemporaryDirectory(dir=REPO_ROOT) as directory:
            path = Path(directory) / 'libraries.txt'
            path.write_text('numpy\n')
            with mock.patch('pkg_resources.get_distribution') as get_distribution:
                check_required_libraries(path)

        get_distribution.assert_called_once_with('numpy')


if __name__ == '__main__':
    unittest.main()
