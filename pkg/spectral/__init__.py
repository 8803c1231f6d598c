# bst spectral package
