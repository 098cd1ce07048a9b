import sys

from correlation_analyzer.correlation_analyzer import main

sys.exit(main())
