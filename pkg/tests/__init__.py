# Makes the tests directory a package so pytest_plugins imports resolve.

