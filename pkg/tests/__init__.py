# Tests package for smilesqa
