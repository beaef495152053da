"""Prints styled messages to command-line interface

Usage example:
---
from covreg import verbose

verbose.info('Harvested 1240 rules')
verbose.error('Rule export failed')
verbose.error.append('Second line of the error')
---

'info' and 'success' are silent unless verbose mode is on ('--verbose' on the command line, the
COVREG_VERBOSE environment variable, or 'verbose.verbose(True)'). 'warn' and 'error' always print, to stderr.

The covreg project
"""

import datetime
import os
import sys

from django.utils.termcolors import make_style


SUCCESS = make_style(fg='green')
WARNING = make_style(opts=('bold',), fg='yellow')
ERROR = make_style(fg='red')

_verbose = '--verbose' in sys.argv or bool(os.environ.get('COVREG_VERBOSE'))


def _no_style(string: str) -> str:
    return string


class _Say:
    def __init__(self, category: str, style: callable = None, always: bool = False):
        self.category = category
        self.style = style or _no_style
        self.always = always

    @property
    def stream(self):
        return sys.stderr if self.always else sys.stdout

    def __call__(self, message: str, caller: callable = None) -> None:
        if _verbose or self.always:
            now = datetime.datetime.now()
            stream = self.stream

            stream.write(self.style(now.isoformat().replace('T', ' ')[:19].ljust(21)))
            stream.write(self.style('[ %s ]  ' % self.category.ljust(9)))

            if caller is not None:
                stream.write(self.style('%s.%s\n' % (caller.__module__, caller.__name__)))

            stream.write(self.style(':  %s\n' % message))
            stream.flush()


class _Append:
    def __init__(self, say: _Say):
        self.say = say

    def __call__(self, message: str) -> None:
        if _verbose or self.say.always:
            self.say.stream.write(self.say.style(':  %s\n' % message))
            self.say.stream.flush()


def verbose(on: bool = True) -> None:
    global _verbose
    _verbose = on


info = _Say('INFO')
success = _Say('SUCCESS', SUCCESS)
warn = _Say('WARNING', WARNING, always=True)
error = _Say('ERROR', ERROR, always=True)

error.append = _Append(error)
