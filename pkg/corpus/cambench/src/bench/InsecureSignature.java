package bench;

import java.security.PrivateKey;
import java.security.Signature;

public class InsecureSignature {

    public byte[] signDocument(PrivateKey key, byte[] document) throws Exception {
        Signature signer = Signature.getInstance("SHA1withRSA");
        signer.initSign(key);
        signer.update(document);
        return signer.sign();
    }
}
