"""Fixed 100-word English stopword list used by the keywords operation."""

STOPWORDS = frozenset(
    """
    the a an and or but if then else of at by for with about against between
    into through during before after above below to from up down in out on
    off over under again further once here there when where why how all any
    both each few more most other some such no nor not only own same so than
    too very can will just should now is are was were be been being have has
    had having do does did doing would could might must shall may i you he
    she it we they this that these those
    """.split()
)

assert len(STOPWORDS) == 100
