"""Rewrite every ``*.expected.json`` from its ``*.args`` file. Run from the repository root."""
import contextlib
import io
import shlex
from pathlib import Path

from msbgame.cli import main

here = Path(__file__).parent
for args_file in sorted(here.glob("*.args")):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(shlex.split(args_file.read_text()))
    assert code == 0, f"{args_file.name} exited with {code}"
    args_file.with_suffix(".expected.json").write_text(buf.getvalue())
    print(args_file.stem)
