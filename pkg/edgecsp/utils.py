# -*- coding: utf-8 -*-
"""
Shared plumbing: package defaults, reference fixtures and logger set-up.
"""

import os
import importlib.resources as pkg_resources
import json
import logging
from inspect import currentframe

from . import templates

DEFAULTS = json.loads(pkg_resources.read_text(templates, 'defaults.json'))
FIXTURES = json.loads(pkg_resources.read_text(templates, 'fixtures.json'))


def setting(key: str, override=None):
    """Return a default setting, unless an explicit override is given.

    Args:
        key: dotted path into defaults.json, e.g. ``"oracle.max_labelings"``
        override: value supplied by the caller, used when not None

    Returns:
        the override or the configured default
    """
    if override is not None:
        return override

    value = DEFAULTS
    for part in key.split('.'):
        value = value[part]
    return value


def get_logger(logger_name: str = None, verbose: bool = True):
    """Get the logger by the logger name

    Args:
        logger_name: if not provided, will be the script name that calls
            the object.
        verbose: the logging level sets on info if verbose, else warning
    """

    if logger_name is None:
        frame = currentframe().f_back.f_back
        while frame is not None and \
                frame.f_code.co_filename.startswith("<frozen"):
            frame = frame.f_back
        if frame is None:
            logger_name = 'edgecsp'
        else:
            logger_name = os.path.splitext(
                os.path.basename(frame.f_code.co_filename)
                )[0]

    if verbose:
        logging.basicConfig(level=logging.INFO)
    else:
        logging.basicConfig(level=logging.WARNING)

    logger = logging.getLogger(logger_name)

    return logger
