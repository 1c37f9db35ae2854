"""Counts WSDL components with ElementTree, for cross-checking the C++ reader.

Prints JSON: {"messages": n, "operations": n, "fields": {message: leaf count}}.
"""
import json
import sys
import xml.etree.ElementTree as ET

W = "{http://schemas.xmlsoap.org/wsdl/}"
X = "{http://www.w3.org/2001/XMLSchema}"


def local(qname):
    return qname.split(":")[-1]


def main(path):
    root = ET.parse(path).getroot()
    elements, types = {}, {}
    for schema in root.iter(X + "schema"):
        for child in schema:
            if child.tag == X + "element":
                elements[child.get("name")] = child
            elif child.tag == X + "complexType":
                types[child.get("name")] = child

    def content(node):
        return [e for e in node.iter(X + "element") if e is not node]

    def fields(el):
        t = el.get("type")
        if t and local(t) in types:
            return content(types[local(t)])
        inline = el.find(X + "complexType")
        return content(inline) if inline is not None else None

    counts = {}
    for msg in root.findall(W + "message"):
        parts = msg.findall(W + "part")
        if len(parts) == 1 and parts[0].get("element"):
            f = fields(elements[local(parts[0].get("element"))])
            counts[msg.get("name")] = len(f) if f is not None else 1
        else:
            counts[msg.get("name")] = len(parts)
    ops = sum(len(pt.findall(W + "operation")) for pt in root.findall(W + "portType")[:1])
    print(json.dumps({"messages": len(root.findall(W + "message")), "operations": ops, "fields": counts}))


if __name__ == "__main__":
    main(sys.argv[1])
