from .commands import main, build_parser, cmd_simulate, cmd_run, cmd_evaluate, cmd_ablate, load_config

__all__ = [
    'main',
    'build_parser',
    'cmd_simulate',
    'cmd_run',
    'cmd_evaluate',
    'cmd_ablate',
    'load_config',
]
