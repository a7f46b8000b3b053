# Utils package for smilesqa: console reporter and synthetic corpora
