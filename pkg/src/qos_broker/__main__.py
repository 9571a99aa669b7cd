import sys

from qos_broker.cli import main

sys.exit(main())
