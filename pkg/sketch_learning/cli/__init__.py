"""Command-line front end."""

from sketch_learning.cli.config import PipelineConfig, parse_config_file, resolve_config
from sketch_learning.cli.main import build_parser, main

__all__ = ["PipelineConfig", "build_parser", "main", "parse_config_file", "resolve_config"]
