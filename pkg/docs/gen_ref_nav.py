# /// script
# requires-python = ">=3.10"
# dependencies = [
#     "mkdocs-autorefs",
#     "mkdocs-gen-files",
#     "mkdocs-include-markdown-plugin",
#     "mkdocs-material",
#     "mkdocstrings",
#     "mkdocstrings-python",
#     "pymdown-extensions",
# ]
# ///
"""Generate the code reference pages and navigation."""

# Run by the mkdocs-gen-files plugin (https://oprypin.github.io/mkdocs-gen-files/): one stub
# page per module of the package plus "reference/SUMMARY.md" linking them. MkDocs fills the
# stubs from the docstrings.
from __future__ import annotations

from pathlib import Path

import mkdocs_gen_files

PACKAGE = "imuguard"

# Modules without public API worth a page
IGNORED_MODULES = ("types", "constants", "__main__")


def process_python_files(package: str) -> None:
    """Write a stub page per module and the summary page."""
    nav = mkdocs_gen_files.Nav()

    for python_file in sorted(Path(package).rglob("*.py")):
        module_path = python_file.with_suffix("")
        parts = tuple(module_path.parts)
        if parts[-1] in IGNORED_MODULES:
            continue

        doc_path = python_file.relative_to(package).with_suffix(".md")
        if parts[-1] == "__init__":
            parts = parts[:-1]
            doc_path = doc_path.with_name("index.md")
        full_doc_path = Path("reference", doc_path)

        nav[parts] = doc_path.as_posix()
        with mkdocs_gen_files.open(full_doc_path, "w") as fd:
            fd.write(f"::: {'.'.join(parts)}")
        mkdocs_gen_files.set_edit_path(full_doc_path, Path("..") / python_file)

    with mkdocs_gen_files.open("reference/SUMMARY.md", "w") as nav_file:
        nav_file.writelines(nav.build_literate_nav())


process_python_files(PACKAGE)
