import sys

# Provide a nicer check that the user has the right version of Python than
# them getting a `SyntaxError` deep inside numpy.
assert sys.version_info >= (3, 8), (
    "Sorry, you must be using Python 3.8 or newer. "
    "See the README for how to set up a suitable environment."
)
