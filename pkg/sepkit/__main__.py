#
# Copyright (c) 2025, sepkit developers
#
# SPDX-License-Identifier: BSD 2-Clause License
#

import sys

from sepkit.cli import main

sys.exit(main())
