"""Command decorator

The covreg project
"""

from functools import wraps
from typing import Any, Callable, Dict

from . import verbose
from .exceptions import CovregError, InputError, PipelineError, SuitabilityError
from .glossary import ExitCode

COMMANDS: Dict[str, Callable[..., int]] = {}


def command(name: str) -> Callable[..., Any]:
    """Register a command-line command and transform its outcome into an exit code

    Failures are reported through 'verbose.error' and mapped as follows:
    ---
        SuitabilityError           4
        InputError, OSError        2
        any other CovregError      3 (PipelineError names the failing stage)
    ---

    :param name: Sub-command name, e.g. 'fit'
    :return: The wrapped function, returning an exit code
    """

    def decorator(func: Callable[..., Any]) -> Callable[..., int]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                func(*args, **kwargs)
                return ExitCode.SUCCESS.value

            except SuitabilityError as error:
                verbose.error(str(error), func)
                return ExitCode.SUITABILITY_FAILURE.value

            except (InputError, OSError) as error:
                verbose.error(str(error), func)
                return ExitCode.INPUT_ERROR.value

            except PipelineError as error:
                verbose.error(str(error), func)
                verbose.error.append('%s raised in stage %s' % (type(error.cause).__name__, error.stage))
                return ExitCode.PIPELINE_ERROR.value

            except CovregError as error:
                verbose.error(str(error), func)
                return ExitCode.PIPELINE_ERROR.value

        wrapper.command = name
        COMMANDS[name] = wrapper
        return wrapper

    return decorator
