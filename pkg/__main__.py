import unittest

from robustgate import *
from tests import *


if __name__ == "__main__":
    # Run the tests; set ROBUSTGATE_ACCEPTANCE=1 to include the full-size synthesis runs
    unittest.main()
