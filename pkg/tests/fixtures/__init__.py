# Package marker for shared pytest fixtures.

