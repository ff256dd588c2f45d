import os
import sys
from argparse import ArgumentError, ArgumentParser
from pathlib import Path
from typing import List, Optional, cast

import betterlogging as logging  # type: ignore

from . import __version__
from .errors import ScenarioError, SigflowError
from .experiment import EXIT_FAILED, EXIT_INPUT, run
from .typing import Config
from .utils import load_config


def _default_tol() -> Optional[float]:
    value = os.getenv('SIGFLOW_TOL')
    if not value:
        return None
    try:
        return float(value)
    except ValueError:
        raise ArgumentError(None, f'SIGFLOW_TOL must be a number, got {value!r}')


def main(argv: Optional[List[str]] = None) -> int:

    parser = ArgumentParser(description='Contexts, daseinisation and unitary flows on the spectral presheaf.')
    parser.add_argument('command', choices=['contexts', 'daseinise', 'evolve', 'check', 'ks'],
                        help='what to compute')
    parser.add_argument('--scenario', type=Path, required=True, help='path of the scenario file (JSON or YAML)')
    parser.add_argument('--out', type=Path, help='output directory, tables are printed to stdout if omitted')
    parser.add_argument('--tol', type=float,
                        help='pass threshold for identity checks, default is $SIGFLOW_TOL or the config value')
    parser.add_argument('--budget', type=int, help='node limit for the global section search')
    parser.add_argument('--check', choices=['compat', 'covariance', 'axioms', 'flow-identity'],
                        help='which identity to verify (check command only)')
    parser.add_argument('--proposition', type=str, help='restrict to one proposition of the scenario')
    parser.add_argument('--seed', type=int, help='seed for randomly sampled subobjects')
    parser.add_argument('--config', type=Path, default='config.toml',
                        help='path of the config file to override the default config, default is using "config.toml" in current directory')
    parser.add_argument('-l', '--log-level', default='info',
                        help='set log level (debug, info, warning, error, critical)')
    parser.add_argument('-v', '--version', action='version', version=__version__)
    args = parser.parse_args(argv)

    logging.basic_colorized_config(level=args.log_level.upper())
    logger = logging.getLogger(__name__)

    try:
        config_file = Path(args.config)
        if config_file.is_file():
            logger.info(f'Using config file: {config_file}')
            config = cast(Config, load_config(config_file))
        else:
            config = None

        if args.command == 'check' and args.check is None:
            raise ArgumentError(None, 'The check command needs "--check".')
        if args.command != 'check' and args.check is not None:
            logger.warning(f'"--check" is ignored by the {args.command} command.')

        tol = args.tol if args.tol is not None else _default_tol()

        exit_code, _ = run(
            args.command,
            args.scenario,
            args.out,
            tol=tol,
            budget=args.budget,
            check=args.check,
            proposition=args.proposition,
            seed=args.seed,
            config=config,
        )
    except ArgumentError as e:
        logger.error(e)
        return EXIT_INPUT
    except ScenarioError as e:
        logger.error(f'Invalid scenario: {e}')
        return EXIT_INPUT
    except (FileNotFoundError, ImportError) as e:
        logger.error(e)
        return EXIT_INPUT
    except SigflowError as e:
        logger.error(e)
        return EXIT_FAILED
    except Exception as e:
        logger.exception(e)
        return EXIT_FAILED
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
