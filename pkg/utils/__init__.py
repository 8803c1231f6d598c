# bst utils package
