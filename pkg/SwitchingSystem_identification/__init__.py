from .common import *  # noqa F401 F403
from .core import *  # noqa F401 F403
from .simulate import *  # noqa F401 F403
from .convex import *  # noqa F401 F403
from .assign import *  # noqa F401 F403
from .fit import *  # noqa F401 F403
from .bilevel import *  # noqa F401 F403
from .surface import *  # noqa F401 F403
from .evaluate import *  # noqa F401 F403
