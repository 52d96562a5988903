__version__ = "0.3"
__author__ = "Core Erlang Semantics contributors"
__author_email__ = "core-erlang-semantics@users.noreply.github.com"
