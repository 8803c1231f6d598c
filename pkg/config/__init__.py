# bst config package
